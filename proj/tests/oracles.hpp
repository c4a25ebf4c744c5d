#pragma once

// Test-only reference implementations. None of these touch Eigen or the
// library's numeric paths, so they can check them independently.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix transpose(const Matrix& a)
{
    if (a.empty()) {
        return {};
    }
    Matrix t(a[0].size(), std::vector<double>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a[i].size(); ++j) {
            t[j][i] = a[i][j];
        }
    }
    return t;
}

inline Matrix multiply(const Matrix& a, const Matrix& b)
{
    Matrix c(a.size(), std::vector<double>(b.empty() ? 0 : b[0].size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t k = 0; k < b.size(); ++k) {
            for (std::size_t j = 0; j < b[k].size(); ++j) {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    return c;
}

/// Population covariance of the rows after mean-centring.
inline Matrix centred_covariance(const Matrix& rows)
{
    const std::size_t n = rows.size();
    const std::size_t d = rows[0].size();
    std::vector<double> mean(d, 0.0);
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < d; ++j) {
            mean[j] += r[j] / static_cast<double>(n);
        }
    }
    Matrix c(d, std::vector<double>(d, 0.0));
    for (const auto& r : rows) {
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) {
                c[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]) / static_cast<double>(n);
            }
        }
    }
    return c;
}

struct EigenPairs {
    std::vector<double> values;  // descending
    Matrix vectors;              // vectors[i] pairs with values[i]
};

/// Cyclic Jacobi rotation method for a symmetric matrix.
inline EigenPairs jacobi_eigen(Matrix a)
{
    const std::size_t n = a.size();
    Matrix v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        v[i][i] = 1.0;
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        double total = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = 0; q < n; ++q) {
                total += a[p][q] * a[p][q];
                if (p != q) {
                    off += a[p][q] * a[p][q];
                }
            }
        }
        if (off <= 1e-30 * std::max(total, 1e-300)) {
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) {
                    continue;
                }
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0)
                    / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p];
                    const double vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
    EigenPairs out;
    for (const auto i : order) {
        out.values.push_back(a[i][i]);
        std::vector<double> vec(n);
        for (std::size_t k = 0; k < n; ++k) {
            vec[k] = v[k][i];
        }
        out.vectors.push_back(std::move(vec));
    }
    return out;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

/// Largest sine of the principal angles between span(a) and span(b), each
/// given as orthonormal rows: the spectral norm of (I - P_b) a^T.
inline double max_principal_sine(const Matrix& a, const Matrix& b)
{
    Matrix residual;
    for (const auto& row : a) {
        std::vector<double> r = row;
        for (const auto& q : b) {
            const double c = dot(row, q);
            for (std::size_t k = 0; k < r.size(); ++k) {
                r[k] -= c * q[k];
            }
        }
        residual.push_back(std::move(r));
    }
    const auto eig = jacobi_eigen(multiply(residual, transpose(residual)));
    return std::sqrt(std::max(0.0, eig.values.front()));
}

struct Hit {
    std::string id;
    double similarity;
};

/// Ranks every row by brute-force cosine, ties by bytewise id.
inline std::vector<Hit> brute_force_ranking(const std::vector<std::string>& ids, const Matrix& rows,
                                            const std::vector<double>& q)
{
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double s = dot(rows[i], q) / (std::sqrt(dot(rows[i], rows[i])) * std::sqrt(dot(q, q)));
        hits.push_back({ids[i], std::clamp(s, -1.0, 1.0)});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) {
        if (x.similarity != y.similarity) {
            return x.similarity > y.similarity;
        }
        return std::memcmp(x.id.data(), y.id.data(), std::min(x.id.size(), y.id.size())) < 0
            || (std::memcmp(x.id.data(), y.id.data(), std::min(x.id.size(), y.id.size())) == 0
                && x.id.size() < y.id.size());
    });
    return hits;
}

/// Independent decoder of the feature interchange format, walking raw bytes.
struct DecodedFeatures {
    std::string model;
    std::uint32_t crop = 0;
    std::uint64_t n = 0;
    std::uint64_t d = 0;
    std::vector<std::string> ids;
    std::vector<float> values;
};

inline DecodedFeatures decode_fcbf(const std::string& bytes)
{
    std::size_t pos = 0;
    auto need = [&](std::size_t k) {
        if (pos + k > bytes.size()) {
            throw std::runtime_error("short");
        }
    };
    auto le = [&](int width) {
        need(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) {
            v += static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        }
        pos += static_cast<std::size_t>(width);
        return v;
    };
    auto str = [&]() {
        const auto len = static_cast<std::size_t>(le(2));
        need(len);
        std::string s = bytes.substr(pos, len);
        pos += len;
        return s;
    };
    need(4);
    if (bytes.compare(0, 4, "FCBF") != 0) {
        throw std::runtime_error("magic");
    }
    pos = 4;
    if (le(2) != 1) {
        throw std::runtime_error("version");
    }
    DecodedFeatures out;
    out.model = str();
    out.crop = static_cast<std::uint32_t>(le(4));
    out.n = le(8);
    out.d = le(8);
    for (std::uint64_t i = 0; i < out.n; ++i) {
        out.ids.push_back(str());
    }
    for (std::uint64_t i = 0; i < out.n * out.d; ++i) {
        const auto bits = static_cast<std::uint32_t>(le(4));
        float f;
        std::memcpy(&f, &bits, 4);
        out.values.push_back(f);
    }
    if (pos != bytes.size()) {
        throw std::runtime_error("trailing");
    }
    return out;
}

} // namespace oracle
