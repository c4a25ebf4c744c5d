#pragma once

// Builds on-disk synthetic experiments for driving the CLI end to end.

#include "docret/cli.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace scenario {

namespace fs = std::filesystem;

struct Model {
    std::string name;
    std::int64_t dim = 32;
    double query_cosine = 1.0; // cosine between each query and its original
    std::string space;         // shared synthetic space, empty for the model's own
};

struct Experiment {
    fs::path dir;
    fs::path config;
    fs::path out;
};

inline std::string image_name(std::size_t i)
{
    return "img" + std::to_string(10000 + i);
}

inline std::string query_name(std::size_t i)
{
    return "qry" + std::to_string(10000 + i);
}

/**
 * `images` training images, the first `queries` of them each with one
 * perturbed query. Extra top-level config keys come from `extra`.
 */
inline Experiment write(const fs::path& dir, std::size_t images, std::size_t queries,
                        const std::vector<Model>& models, std::uint64_t seed,
                        const nlohmann::json& extra = nlohmann::json::object())
{
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream train(dir / "train.txt");
        for (std::size_t i = 0; i < images; ++i) {
            train << image_name(i) << '\n';
        }
        std::ofstream pairs(dir / "pairs.tsv");
        for (std::size_t i = 0; i < queries; ++i) {
            pairs << query_name(i) << '\t' << image_name(i) << '\n';
        }
    }
    nlohmann::json config = {
        {"training_manifest", "train.txt"},
        {"calibration", "pairs.tsv"},
        {"seed", seed},
        {"models", nlohmann::json::array()},
    };
    for (const auto& m : models) {
        const std::string table = "perturb_" + m.name + ".tsv";
        std::ofstream p(dir / table);
        p.precision(17);
        for (std::size_t i = 0; i < queries; ++i) {
            p << query_name(i) << '\t' << image_name(i) << '\t' << m.query_cosine << '\n';
        }
        nlohmann::json backend{{"kind", "synthetic"}, {"dim", m.dim}, {"perturbations", table}};
        if (!m.space.empty()) {
            backend["space"] = m.space;
        }
        config["models"].push_back({{"name", m.name}, {"backend", backend}});
    }
    for (const auto& [key, value] : extra.items()) {
        config[key] = value;
    }
    std::ofstream(dir / "config.json") << config.dump(2) << '\n';
    return {dir, dir / "config.json", dir / "out"};
}

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

inline Result run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = docret::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

inline Result stage(const Experiment& e, const std::string& name, std::vector<std::string> more = {})
{
    std::vector<std::string> args{name, "--config", e.config.string(), "--out", e.out.string()};
    args.insert(args.end(), more.begin(), more.end());
    return run(args);
}

inline std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Every regular file under `root`, relative path -> contents.
inline std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& root)
{
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) {
            files.emplace_back(fs::relative(entry.path(), root).string(), slurp(entry.path()));
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

} // namespace scenario
