#pragma once

// Ordinary kriging with an exponential variogram
//   gamma(0) = 0,  gamma(h) = nugget + (sill - nugget) * (1 - exp(-h / range))  for h > 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "swarmevo/errors.hpp"
#include "swarmevo/geometry.hpp"
#include "swarmevo/neat/genome_io.hpp"
#include "swarmevo/parallel.hpp"

namespace swarmevo {

struct TemperatureSample {
    Vec2 position;
    double value = 0.0;  ///< degrees C
    double time = 0.0;   ///< s
};

struct Variogram {
    double nugget = 0.0;
    double sill = 1.0;
    double range = 10.0;

    [[nodiscard]] double operator()(double h) const noexcept {
        if (h <= 0.0) {
            return 0.0;
        }
        return nugget + (sill - nugget) * (1.0 - std::exp(-h / range));
    }
};

struct VariogramBin {
    double lag = 0.0;    ///< mean pair distance in the bin
    double gamma = 0.0;  ///< semivariance
    std::size_t pairs = 0;
};

/// Empirical semivariogram over `bins` equal-width lag bins up to half the
/// largest pairwise distance. Empty bins are dropped.
inline std::vector<VariogramBin> empirical_variogram(std::span<const TemperatureSample> samples, int bins = 15) {
    double max_d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            max_d = std::max(max_d, distance(samples[i].position, samples[j].position));
        }
    }
    if (max_d <= 0.0) {
        throw FitError("variogram needs samples at distinct positions");
    }
    const double cutoff = max_d / 2.0;
    const double width = cutoff / bins;
    std::vector<double> lag(static_cast<std::size_t>(bins), 0.0);
    std::vector<double> sq(static_cast<std::size_t>(bins), 0.0);
    std::vector<std::size_t> count(static_cast<std::size_t>(bins), 0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            const double d = distance(samples[i].position, samples[j].position);
            if (d <= 0.0 || d > cutoff) {
                continue;
            }
            const auto b = std::min(static_cast<std::size_t>(d / width), static_cast<std::size_t>(bins - 1));
            const double dz = samples[i].value - samples[j].value;
            lag[b] += d;
            sq[b] += dz * dz;
            ++count[b];
        }
    }
    std::vector<VariogramBin> out;
    for (std::size_t b = 0; b < lag.size(); ++b) {
        if (count[b] > 0) {
            const auto n = static_cast<double>(count[b]);
            out.push_back({lag[b] / n, sq[b] / (2.0 * n), count[b]});
        }
    }
    return out;
}

namespace detail {

struct NonNegativeFit {
    double nugget = 0.0;
    double partial = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

/// For a fixed range, minimizes sum_k w_k (g_k - n - p f_k)^2 over n, p >= 0.
inline NonNegativeFit fit_for_range(std::span<const VariogramBin> bins, double range) {
    double sw = 0, sf = 0, sff = 0, sg = 0, sfg = 0;
    std::vector<double> f(bins.size());
    for (std::size_t k = 0; k < bins.size(); ++k) {
        const double w = static_cast<double>(bins[k].pairs);
        f[k] = 1.0 - std::exp(-bins[k].lag / range);
        sw += w;
        sf += w * f[k];
        sff += w * f[k] * f[k];
        sg += w * bins[k].gamma;
        sfg += w * f[k] * bins[k].gamma;
    }
    auto sse = [&](double n, double p) {
        double s = 0.0;
        for (std::size_t k = 0; k < bins.size(); ++k) {
            const double r = bins[k].gamma - n - p * f[k];
            s += static_cast<double>(bins[k].pairs) * r * r;
        }
        return s;
    };
    std::vector<std::pair<double, double>> candidates{{0.0, 0.0}};
    const double det = sw * sff - sf * sf;
    if (std::abs(det) > 1e-12 * sw * sff) {
        const double n = (sff * sg - sf * sfg) / det;
        const double p = (sw * sfg - sf * sg) / det;
        if (n >= 0.0 && p >= 0.0) {
            candidates.emplace_back(n, p);
        }
    }
    if (sff > 0.0) {
        candidates.emplace_back(0.0, std::max(0.0, sfg / sff));
    }
    candidates.emplace_back(std::max(0.0, sg / sw), 0.0);
    NonNegativeFit best;
    for (auto [n, p] : candidates) {
        const double s = sse(n, p);
        if (s < best.sse) {
            best = {n, p, s};
        }
    }
    return best;
}

}  // namespace detail

/// Weighted (by pair count) least-squares fit of the exponential model to the
/// empirical semivariogram. Needs at least 5 samples at distinct positions.
inline Variogram fit_variogram(std::span<const TemperatureSample> samples, int bins = 15) {
    if (samples.size() < 5) {
        throw FitError("variogram fit needs at least 5 samples");
    }
    const auto emp = empirical_variogram(samples, bins);
    if (emp.size() < 2) {
        throw FitError("variogram fit needs at least two populated lag bins");
    }
    const double max_lag = emp.back().lag;
    // Log-spaced scan of the range, then golden-section refinement.
    const double lo = max_lag / 200.0;
    const double hi = max_lag * 20.0;
    constexpr int kScan = 120;
    double best_r = lo;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kScan; ++i) {
        const double r = lo * std::pow(hi / lo, static_cast<double>(i) / kScan);
        const double s = detail::fit_for_range(emp, r).sse;
        if (s < best_sse) {
            best_sse = s;
            best_r = r;
        }
    }
    const double step = std::pow(hi / lo, 1.0 / kScan);
    double a = std::log(std::max(lo, best_r / step));
    double b = std::log(std::min(hi, best_r * step));
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 60; ++it) {
        const double c = b - phi * (b - a);
        const double d = a + phi * (b - a);
        if (detail::fit_for_range(emp, std::exp(c)).sse <= detail::fit_for_range(emp, std::exp(d)).sse) {
            b = d;
        } else {
            a = c;
        }
    }
    const double r = std::exp((a + b) / 2.0);
    const auto fit = detail::fit_for_range(emp, r);
    const double refined = fit.sse <= best_sse ? r : best_r;
    const auto final_fit = detail::fit_for_range(emp, refined);
    return {final_fit.nugget, final_fit.nugget + final_fit.partial, refined};
}

/// Samples at coincident positions are replaced by their mean value.
inline std::vector<TemperatureSample> merge_duplicates(std::span<const TemperatureSample> samples) {
    std::map<std::pair<double, double>, std::pair<double, int>> acc;
    std::vector<std::pair<double, double>> order;
    for (const auto& s : samples) {
        auto key = std::make_pair(s.position.x, s.position.y);
        auto [it, inserted] = acc.try_emplace(key, 0.0, 0);
        if (inserted) {
            order.push_back(key);
        }
        it->second.first += s.value;
        ++it->second.second;
    }
    std::vector<TemperatureSample> out;
    out.reserve(order.size());
    for (const auto& key : order) {
        const auto& [sum, n] = acc[key];
        out.push_back({{key.first, key.second}, sum / n, 0.0});
    }
    return out;
}

struct KrigingModel {
    Variogram variogram;
    std::vector<TemperatureSample> samples;  ///< duplicates merged

    KrigingModel() = default;
    KrigingModel(Variogram v, std::span<const TemperatureSample> s) : variogram(v), samples(merge_duplicates(s)) {
        if (!(v.range > 0.0) || v.nugget < 0.0 || v.sill < v.nugget) {
            throw FitError("variogram needs range > 0 and sill >= nugget >= 0");
        }
    }
};

inline KrigingModel fit_kriging_model(std::span<const TemperatureSample> samples) {
    return {fit_variogram(samples), samples};
}

struct KrigingOptions {
    int neighbours = 32;  ///< nearest samples per query; <= 0 uses all samples
};

struct KrigingSolution {
    std::vector<std::size_t> indices;  ///< samples used
    std::vector<double> weights;
    double lagrange = 0.0;
    double prediction = 0.0;
    double variance = 0.0;
};

/// Solves the ordinary-kriging system at `q`.
inline KrigingSolution krige_point(const KrigingModel& m, Vec2 q, KrigingOptions opt = {}) {
    if (m.samples.empty()) {
        throw FitError("kriging needs at least one sample");
    }
    KrigingSolution s;
    s.indices.resize(m.samples.size());
    for (std::size_t i = 0; i < s.indices.size(); ++i) {
        s.indices[i] = i;
    }
    if (opt.neighbours > 0 && s.indices.size() > static_cast<std::size_t>(opt.neighbours)) {
        const auto k = static_cast<std::ptrdiff_t>(opt.neighbours);
        std::nth_element(s.indices.begin(), s.indices.begin() + k - 1, s.indices.end(),
                         [&](std::size_t a, std::size_t b) {
                             const double da = norm_sq(m.samples[a].position - q);
                             const double db = norm_sq(m.samples[b].position - q);
                             return da != db ? da < db : a < b;
                         });
        s.indices.resize(static_cast<std::size_t>(k));
        std::sort(s.indices.begin(), s.indices.end());
    }
    const auto n = static_cast<Eigen::Index>(s.indices.size());
    Eigen::MatrixXd A(n + 1, n + 1);
    Eigen::VectorXd rhs(n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec2 pi = m.samples[s.indices[static_cast<std::size_t>(i)]].position;
        for (Eigen::Index j = 0; j < n; ++j) {
            A(i, j) = m.variogram(distance(pi, m.samples[s.indices[static_cast<std::size_t>(j)]].position));
        }
        A(i, n) = 1.0;
        A(n, i) = 1.0;
        rhs(i) = m.variogram(distance(pi, q));
    }
    A(n, n) = 0.0;
    rhs(n) = 1.0;

    Eigen::VectorXd x;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.isInvertible()) {
        x = lu.solve(rhs);
    } else {
        // Flat variogram: the minimum-norm solution weights samples equally.
        x = A.completeOrthogonalDecomposition().solve(rhs);
    }
    s.weights.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = x(i);
        s.weights[static_cast<std::size_t>(i)] = w;
        s.prediction += w * m.samples[s.indices[static_cast<std::size_t>(i)]].value;
        s.variance += w * rhs(i);
    }
    s.lagrange = x(n);
    s.variance = std::max(0.0, s.variance + s.lagrange);
    return s;
}

struct GridSpec {
    Vec2 origin;
    double cell_size = 1.0;
    int cols = 0;
    int rows = 0;

    [[nodiscard]] Vec2 cell_center(int col, int row) const noexcept {
        return {origin.x + (col + 0.5) * cell_size, origin.y + (row + 0.5) * cell_size};
    }

    /// Grid covering the fence's bounding box.
    static GridSpec covering(const GeoFence& fence, double cell_size) {
        const auto [lo, hi] = fence.bounds();
        GridSpec g;
        g.cell_size = cell_size;
        g.origin = {std::floor(lo.x / cell_size) * cell_size, std::floor(lo.y / cell_size) * cell_size};
        g.cols = static_cast<int>(std::ceil((hi.x - g.origin.x) / cell_size));
        g.rows = static_cast<int>(std::ceil((hi.y - g.origin.y) / cell_size));
        return g;
    }
};

struct KrigedMap {
    GridSpec grid;
    std::vector<char> mask;  ///< 1 = inside the area
    std::vector<double> prediction;
    std::vector<double> error_std;
    double time = 0.0;

    [[nodiscard]] double mean_error_std() const {
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i]) {
                s += error_std[i];
                ++n;
            }
        }
        return n == 0 ? 0.0 : s / static_cast<double>(n);
    }
};

/// Kriges every grid cell whose centre lies inside `area` (all cells when
/// `area` is null). Cells are independent and solved concurrently.
inline KrigedMap krige_grid(const KrigingModel& m, const GridSpec& grid, const GeoFence* area,
                            KrigingOptions opt = {}, unsigned threads = default_threads()) {
    KrigedMap out;
    out.grid = grid;
    const auto cells = static_cast<std::size_t>(grid.cols) * static_cast<std::size_t>(grid.rows);
    out.mask.assign(cells, 1);
    out.prediction.assign(cells, 0.0);
    out.error_std.assign(cells, 0.0);
    parallel_for(cells, threads, [&](std::size_t i) {
        const int c = static_cast<int>(i % static_cast<std::size_t>(grid.cols));
        const int r = static_cast<int>(i / static_cast<std::size_t>(grid.cols));
        const Vec2 q = grid.cell_center(c, r);
        if (area != nullptr && !point_in_polygon(q, *area)) {
            out.mask[i] = 0;
            return;
        }
        const KrigingSolution s = krige_point(m, q, opt);
        out.prediction[i] = s.prediction;
        out.error_std[i] = std::sqrt(s.variance);
    });
    return out;
}

/// Writes one layer of a kriged map in the coverage-grid text layout
/// (southernmost row first); cells outside the area are written as `nan`.
inline void write_map_layer(std::ostream& os, const KrigedMap& m, const std::vector<double>& layer,
                            const std::string& title) {
    os << "# swarmevo " << title << " grid\n";
    os << "origin " << neat::format_real(m.grid.origin.x) << ' ' << neat::format_real(m.grid.origin.y) << '\n';
    os << "cell_size " << neat::format_real(m.grid.cell_size) << '\n';
    os << "size " << m.grid.cols << ' ' << m.grid.rows << '\n';
    os << "step " << static_cast<long long>(std::llround(m.time * 10.0)) << '\n';
    for (int r = 0; r < m.grid.rows; ++r) {
        for (int c = 0; c < m.grid.cols; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * static_cast<std::size_t>(m.grid.cols) +
                                  static_cast<std::size_t>(c);
            if (c > 0) {
                os << ' ';
            }
            os << (m.mask[i] ? neat::format_real(layer[i]) : std::string("nan"));
        }
        os << '\n';
    }
}

}  // namespace swarmevo
