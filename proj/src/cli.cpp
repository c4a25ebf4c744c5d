#include "docret/cli.hpp"

#include "docret/errors.hpp"
#include "docret/feature_io.hpp"
#include "docret/fusion.hpp"
#include "docret/pipeline.hpp"
#include "docret/similarity_index.hpp"

#include "CLI11.hpp"

#include <functional>
#include <ostream>

namespace docret::cli {

namespace {

struct GlobalOptions {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> top_dim;
    std::optional<std::string> preset;
};

PipelineConfig load_config(const GlobalOptions& g)
{
    if (g.config.empty()) {
        throw CLI::RequiredError("--config");
    }
    auto config = PipelineConfig::load(g.config);
    if (g.seed) {
        config.seed = *g.seed;
    }
    if (g.top_dim) {
        if (*g.top_dim < 1) {
            throw ValidationError("--top-dim must be at least 1");
        }
        config.target_dim = static_cast<Eigen::Index>(*g.top_dim);
    }
    if (g.preset) {
        if (!preset_models(*g.preset)) {
            throw ValidationError("unknown preset '" + *g.preset + "'");
        }
        config.preset = *g.preset;
    }
    return config;
}

struct QueryOptions {
    std::string index;
    std::string features;
    std::string id;
    std::size_t k = 10;
};

void run_query(const QueryOptions& q, std::ostream& out)
{
    const auto index = read_index(q.index);
    const auto features = read_feature_file(q.features);
    Eigen::VectorXd vector;
    if (!q.id.empty()) {
        vector = features.row(ImageId(q.id)).transpose();
    } else if (features.rows() == 1) {
        vector = features.row(0).transpose();
    } else {
        throw ValidationError("feature file holds " + std::to_string(features.rows())
                              + " rows; pick one with --id");
    }
    write_hits_tsv(index.query(vector, q.k), out);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Document-image retrieval over fused, PCA-reduced CNN features", "docret"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config, "Pipeline config (JSON)");
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--seed", g.seed, "Override the synthetic-feature seed");
    app.add_option("--top-dim", g.top_dim, "Override the PCA target dimension");
    app.add_option("--preset", g.preset, "Fusion preset: mmf, mmf-1 .. mmf-4");

    using Stage = std::vector<std::string> (*)(const PipelineConfig&, const Layout&);
    const std::vector<std::tuple<const char*, const char*, Stage>> stages{
        {"extract", "Extract per-model features for the training and query manifests", &run_extract},
        {"reduce", "Fit PCA per model and write reduced, normalised features", &run_reduce},
        {"calibrate", "Compute Rank_age and fusion coefficients per model", &run_calibrate},
        {"index", "Fuse the selected models and build the retrieval index", &run_index},
        {"evaluate", "Write Top-1/3/5/10 accuracy of single models and fusions", &run_evaluate},
    };
    std::function<void()> action;
    for (const auto& [name, help, stage] : stages) {
        auto* sub = app.add_subcommand(name, help);
        sub->callback([&, stage = stage] {
            action = [&, stage] {
                const auto config = load_config(g);
                for (const auto& w : stage(config, Layout{g.out})) {
                    err << "warning: " << w << '\n';
                }
            };
        });
    }

    QueryOptions q;
    auto* query = app.add_subcommand("query", "Rank indexed images by cosine similarity to a query");
    query->add_option("--index", q.index, "Index file (.fcix)")->required();
    query->add_option("--features", q.features, "Query features in the index's space (.fcbf)")->required();
    query->add_option("--id", q.id, "Row of the feature file to use as the query");
    query->add_option("-k,--top-k", q.k, "Number of hits")->capture_default_str()
        ->check(CLI::PositiveNumber);
    query->callback([&] { action = [&] { run_query(q, out); }; });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage_error;
    }

    try {
        action();
    } catch (const CLI::RequiredError& e) {
        err << "error: " << e.what() << " is required\n";
        return usage_error;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return numerical_error;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return data_error;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return data_error;
    }
    return ok;
}

} // namespace docret::cli
