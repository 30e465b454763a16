#pragma once

// Decaying coverage grid for the area-monitoring task. Cells are 1 m² over the
// fence's bounding box, masked to cells whose centre lies inside the fence.
// A cell within the visit radius of a robot is set to 1; otherwise it loses
// `decay` per step down to 0. At t = 1 every cell is 0 regardless of robots.
//
// Values are stored as the step of the last visit, so a value is exactly
// max(0, 1 - k * decay) k steps after a visit and exactly 0 once k reaches
// 1 / decay.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "swarmevo/errors.hpp"
#include "swarmevo/fitness.hpp"
#include "swarmevo/geometry.hpp"
#include "swarmevo/neat/genome_io.hpp"

namespace swarmevo {

struct CoverageConfig {
    double cell_size = 1.0;      ///< m
    double visit_radius = 5.0;   ///< m
    double decay = 0.001;        ///< per step
};

class CoverageGrid {
public:
    CoverageGrid(const GeoFence& fence, CoverageConfig cfg = {}) : cfg_(cfg) {
        if (!(cfg.cell_size > 0.0) || !(cfg.visit_radius >= 0.0) || !(cfg.decay > 0.0)) {
            throw ConfigError("coverage grid needs positive cell size and decay");
        }
        decay_steps_ = static_cast<std::int64_t>(std::ceil(1.0 / cfg.decay - 1e-9));
        const auto [lo, hi] = fence.bounds();
        origin_ = {std::floor(lo.x / cfg.cell_size) * cfg.cell_size, std::floor(lo.y / cfg.cell_size) * cfg.cell_size};
        cols_ = static_cast<int>(std::ceil((hi.x - origin_.x) / cfg.cell_size));
        rows_ = static_cast<int>(std::ceil((hi.y - origin_.y) / cfg.cell_size));
        const std::size_t n = static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_);
        mask_.assign(n, 0);
        last_visit_.assign(n, kNever);
        for (int r = 0; r < rows_; ++r) {
            for (int c = 0; c < cols_; ++c) {
                if (point_in_polygon(cell_center(c, r), fence)) {
                    mask_[index(c, r)] = 1;
                    ++cell_count_;
                }
            }
        }
        if (cell_count_ == 0) {
            throw ConfigError("fence contains no coverage cells");
        }
        bucket_.assign(static_cast<std::size_t>(decay_steps_), 0);
    }

    /// Advances to the next step and applies visits from `positions`.
    void step(std::span<const Vec2> positions) {
        ++t_;
        const std::int64_t expired = t_ - decay_steps_;
        if (expired >= 1) {
            auto& b = bucket_[static_cast<std::size_t>(expired % decay_steps_)];
            live_ -= b;
            live_visit_sum_ -= b * expired;
            b = 0;
        }
        if (t_ == 1) {
            return;
        }
        const double r = cfg_.visit_radius;
        const double r_sq = r * r;
        for (const Vec2& p : positions) {
            const int c0 = std::max(0, static_cast<int>(std::floor((p.x - r - origin_.x) / cfg_.cell_size)));
            const int c1 = std::min(cols_ - 1, static_cast<int>(std::floor((p.x + r - origin_.x) / cfg_.cell_size)));
            const int r0 = std::max(0, static_cast<int>(std::floor((p.y - r - origin_.y) / cfg_.cell_size)));
            const int r1 = std::min(rows_ - 1, static_cast<int>(std::floor((p.y + r - origin_.y) / cfg_.cell_size)));
            for (int row = r0; row <= r1; ++row) {
                for (int col = c0; col <= c1; ++col) {
                    const std::size_t i = index(col, row);
                    if (!mask_[i] || norm_sq(cell_center(col, row) - p) > r_sq) {
                        continue;
                    }
                    visit(i);
                }
            }
        }
    }

    [[nodiscard]] std::int64_t time() const noexcept { return t_; }
    [[nodiscard]] int cols() const noexcept { return cols_; }
    [[nodiscard]] int rows() const noexcept { return rows_; }
    [[nodiscard]] Vec2 origin() const noexcept { return origin_; }
    [[nodiscard]] const CoverageConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] std::size_t cell_count() const noexcept { return cell_count_; }
    [[nodiscard]] bool in_area(int col, int row) const noexcept { return mask_[index(col, row)] != 0; }

    [[nodiscard]] Vec2 cell_center(int col, int row) const noexcept {
        return {origin_.x + (col + 0.5) * cfg_.cell_size, origin_.y + (row + 0.5) * cfg_.cell_size};
    }

    /// Current value of a cell; 0 outside the area.
    [[nodiscard]] double value(int col, int row) const noexcept {
        const std::size_t i = index(col, row);
        if (!mask_[i] || last_visit_[i] == kNever) {
            return 0.0;
        }
        const std::int64_t k = t_ - last_visit_[i];
        return k >= decay_steps_ ? 0.0 : 1.0 - static_cast<double>(k) * cfg_.decay;
    }

    /// (1/C) sum_c val(c_t), maintained incrementally.
    [[nodiscard]] double mean_value() const noexcept {
        const double live = static_cast<double>(live_);
        const double sum = live * (1.0 - static_cast<double>(t_) * cfg_.decay) +
                           cfg_.decay * static_cast<double>(live_visit_sum_);
        return std::max(0.0, sum / static_cast<double>(cell_count_));
    }

    /// Same quantity computed cell by cell.
    [[nodiscard]] double mean_value_dense() const noexcept {
        double s = 0.0;
        for (int r = 0; r < rows_; ++r) {
            for (int c = 0; c < cols_; ++c) {
                s += value(c, r);
            }
        }
        return s / static_cast<double>(cell_count_);
    }

    /// Fraction of area cells with a non-zero value.
    [[nodiscard]] double covered_fraction() const noexcept {
        return static_cast<double>(live_) / static_cast<double>(cell_count_);
    }

    /// Dense grid export: header lines then `rows` lines of `cols` values,
    /// first line = southernmost row (y = origin.y), west to east. Cells
    /// outside the area are written as -1.
    void write(std::ostream& os) const {
        os << "# swarmevo coverage grid\n";
        os << "origin " << neat::format_real(origin_.x) << ' ' << neat::format_real(origin_.y) << '\n';
        os << "cell_size " << neat::format_real(cfg_.cell_size) << '\n';
        os << "size " << cols_ << ' ' << rows_ << '\n';
        os << "step " << t_ << '\n';
        for (int r = 0; r < rows_; ++r) {
            for (int c = 0; c < cols_; ++c) {
                if (c > 0) {
                    os << ' ';
                }
                os << (in_area(c, r) ? neat::format_real(value(c, r)) : std::string("-1"));
            }
            os << '\n';
        }
    }

private:
    static constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::min();

    [[nodiscard]] std::size_t index(int col, int row) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(col);
    }

    void visit(std::size_t i) {
        std::int64_t& lv = last_visit_[i];
        if (lv == t_) {
            return;
        }
        if (lv != kNever && t_ - lv < decay_steps_) {
            --bucket_[static_cast<std::size_t>(lv % decay_steps_)];
            --live_;
            live_visit_sum_ -= lv;
        }
        lv = t_;
        ++bucket_[static_cast<std::size_t>(t_ % decay_steps_)];
        ++live_;
        live_visit_sum_ += t_;
    }

    CoverageConfig cfg_;
    std::int64_t decay_steps_ = 1000;
    Vec2 origin_;
    int cols_ = 0;
    int rows_ = 0;
    std::size_t cell_count_ = 0;
    std::vector<char> mask_;
    std::vector<std::int64_t> last_visit_;
    std::vector<std::int64_t> bucket_;  ///< live cells per last-visit step, ring buffer
    std::int64_t live_ = 0;
    std::int64_t live_visit_sum_ = 0;
    std::int64_t t_ = 0;
};

/// Parsed coverage grid file.
struct CoverageMap {
    Vec2 origin;
    double cell_size = 1.0;
    int cols = 0;
    int rows = 0;
    std::int64_t step = 0;
    std::vector<double> values;  ///< row-major, -1 outside the area
};

inline CoverageMap read_coverage_map(std::istream& is) {
    CoverageMap m;
    std::string key;
    std::string line;
    auto expect = [&](const char* k) {
        if (!(is >> key) || key != k) {
            throw ConfigError(std::string("coverage grid: expected '") + k + "'");
        }
    };
    std::getline(is, line);
    if (line.rfind("# swarmevo ", 0) != 0) {
        throw ConfigError("coverage grid: bad header");
    }
    std::string a;
    std::string b;
    expect("origin");
    is >> a >> b;
    m.origin = {neat::parse_real(a), neat::parse_real(b)};
    expect("cell_size");
    is >> a;
    m.cell_size = neat::parse_real(a);
    expect("size");
    is >> m.cols >> m.rows;
    expect("step");
    is >> m.step;
    m.values.reserve(static_cast<std::size_t>(m.cols) * static_cast<std::size_t>(m.rows));
    for (int i = 0; i < m.cols * m.rows; ++i) {
        if (!(is >> a)) {
            throw ConfigError("coverage grid: truncated values");
        }
        m.values.push_back(neat::parse_real(a));
    }
    return m;
}

inline void save_coverage(const std::string& path, const CoverageGrid& g) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw ConfigError("cannot write coverage grid " + path);
    }
    g.write(os);
}

/// (1/T) sum_t mean_c val(c_t), times S, stepping a fresh grid over the trace.
inline double monitoring_fitness(const TrajectoryTrace& tr, CoverageConfig cfg = {}) {
    detail::require_complete(tr);
    if (!tr.fence) {
        throw EvaluationError("monitoring fitness needs a geo-fence");
    }
    CoverageGrid grid(*tr.fence, cfg);
    double total = 0.0;
    for (int t = 1; t <= tr.steps(); ++t) {
        grid.step(tr.at(t));
        total += grid.mean_value();
    }
    return total / tr.steps() * safety_coefficient(tr);
}

/// Monitoring fitness from an already-recorded per-step mean-value history.
inline double monitoring_fitness(std::span<const double> mean_value_history, double safety) {
    if (mean_value_history.empty()) {
        throw EvaluationError("empty coverage history");
    }
    double total = 0.0;
    for (double v : mean_value_history) {
        total += v;
    }
    return total / static_cast<double>(mean_value_history.size()) * safety;
}

}  // namespace swarmevo
