#pragma once

// SVG rendering of logged data: trajectories, grid heatmaps, fitness curves
// and metric time series. Plots only read data that is also written to CSV.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "swarmevo/coverage.hpp"
#include "swarmevo/evolution.hpp"
#include "swarmevo/geometry.hpp"
#include "swarmevo/neat/genome_io.hpp"
#include "swarmevo/scenario.hpp"

namespace swarmevo::plot {

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    [[nodiscard]] bool empty() const noexcept { return !(lo <= hi); }

    /// Finite, non-degenerate range; [0, 1] when nothing was included.
    [[nodiscard]] Range settled() const noexcept {
        if (empty()) {
            return {0.0, 1.0};
        }
        if (hi - lo < 1e-12) {
            return {lo - 0.5, hi + 0.5};
        }
        return *this;
    }
};

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

/// Minimal SVG canvas with a data-to-pixel mapping and labelled axes.
class Canvas {
public:
    Canvas(Range x, Range y, bool equal_aspect = false, double width = 640, double height = 480)
        : x_(x.settled()), y_(y.settled()), w_(width), h_(height) {
        if (equal_aspect) {
            const double sx = (w_ - 2 * kMargin) / (x_.hi - x_.lo);
            const double sy = (h_ - 2 * kMargin) / (y_.hi - y_.lo);
            const double s = std::min(sx, sy);
            const double cx = (x_.lo + x_.hi) / 2.0;
            const double cy = (y_.lo + y_.hi) / 2.0;
            const double hx = (w_ - 2 * kMargin) / s / 2.0;
            const double hy = (h_ - 2 * kMargin) / s / 2.0;
            x_ = {cx - hx, cx + hx};
            y_ = {cy - hy, cy + hy};
        }
    }

    [[nodiscard]] double px(double x) const { return kMargin + (x - x_.lo) / (x_.hi - x_.lo) * (w_ - 2 * kMargin); }
    [[nodiscard]] double py(double y) const { return h_ - kMargin - (y - y_.lo) / (y_.hi - y_.lo) * (h_ - 2 * kMargin); }
    [[nodiscard]] double sx(double dx) const { return dx / (x_.hi - x_.lo) * (w_ - 2 * kMargin); }
    [[nodiscard]] double sy(double dy) const { return dy / (y_.hi - y_.lo) * (h_ - 2 * kMargin); }

    std::ostringstream body;

    void polyline(const std::vector<Vec2>& pts, const std::string& stroke, double width = 1.0,
                  const std::string& extra = "") {
        if (pts.empty()) {
            return;
        }
        body << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\" " << extra
             << " points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            body << (i ? " " : "") << fmt(px(pts[i].x)) << ',' << fmt(py(pts[i].y));
        }
        body << "\"/>\n";
    }

    void polygon(const std::vector<Vec2>& pts, const std::string& fill, const std::string& stroke,
                 const std::string& extra = "") {
        body << "<polygon fill=\"" << fill << "\" stroke=\"" << stroke << "\" " << extra << " points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            body << (i ? " " : "") << fmt(px(pts[i].x)) << ',' << fmt(py(pts[i].y));
        }
        body << "\"/>\n";
    }

    void write(std::ostream& os, const std::string& title, const std::string& xlabel, const std::string& ylabel) const {
        os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_ << "\" viewBox=\"0 0 "
           << w_ << ' ' << h_ << "\">\n";
        os << "<rect x=\"0\" y=\"0\" width=\"" << w_ << "\" height=\"" << h_ << "\" fill=\"white\"/>\n";
        os << "<text x=\"" << w_ / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
           << escape(title) << "</text>\n";
        os << body.str();
        const double x0 = kMargin;
        const double x1 = w_ - kMargin;
        const double y0 = h_ - kMargin;
        const double y1 = kMargin;
        os << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
        os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0 << "\"/>\n";
        os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1 << "\"/>\n";
        os << "</g>\n<g font-family=\"sans-serif\" font-size=\"10\">\n";
        for (int i = 0; i <= 4; ++i) {
            const double xv = x_.lo + (x_.hi - x_.lo) * i / 4.0;
            const double yv = y_.lo + (y_.hi - y_.lo) * i / 4.0;
            os << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << y0 + 14 << "\" text-anchor=\"middle\">" << fmt(xv)
               << "</text>\n";
            os << "<text x=\"" << x0 - 4 << "\" y=\"" << fmt(py(yv) + 3) << "\" text-anchor=\"end\">" << fmt(yv)
               << "</text>\n";
        }
        os << "<text x=\"" << w_ / 2 << "\" y=\"" << h_ - 12 << "\" text-anchor=\"middle\">" << escape(xlabel)
           << "</text>\n";
        os << "<text x=\"14\" y=\"" << h_ / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << h_ / 2
           << ")\">" << escape(ylabel) << "</text>\n";
        os << "</g>\n</svg>\n";
    }

    static std::string escape(const std::string& s) {
        std::string o;
        for (char c : s) {
            switch (c) {
                case '&': o += "&amp;"; break;
                case '<': o += "&lt;"; break;
                case '>': o += "&gt;"; break;
                case '"': o += "&quot;"; break;
                default: o += c;
            }
        }
        return o;
    }

private:
    static constexpr double kMargin = 60.0;
    Range x_;
    Range y_;
    double w_;
    double h_;
};

inline const std::array<const char*, 10>& palette() {
    static const std::array<const char*, 10> p{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return p;
}

/// Robot paths with a square at each start and a circle at each end.
inline void trajectories_svg(std::ostream& os, const TrajectoryLog& log, const std::optional<GeoFence>& fence = {},
                             const std::vector<Vec2>& waypoints = {}, const std::string& title = "trajectories") {
    std::map<int, std::vector<Vec2>> paths;
    Range xr;
    Range yr;
    for (const auto& r : log.rows) {
        paths[r.id].push_back(r.pose.position);
        xr.include(r.pose.position.x);
        yr.include(r.pose.position.y);
    }
    if (fence) {
        for (Vec2 v : fence->vertices()) {
            xr.include(v.x);
            yr.include(v.y);
        }
    }
    for (Vec2 v : waypoints) {
        xr.include(v.x);
        yr.include(v.y);
    }
    Canvas c(xr, yr, true);
    if (fence) {
        c.polygon({fence->vertices().begin(), fence->vertices().end()}, "none", "#444", "stroke-dasharray=\"4 3\"");
    }
    for (Vec2 v : waypoints) {
        c.body << "<path d=\"M" << fmt(c.px(v.x) - 6) << ',' << fmt(c.py(v.y)) << " h12 M" << fmt(c.px(v.x)) << ','
               << fmt(c.py(v.y) - 6) << " v12\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
    for (const auto& [id, pts] : paths) {
        const char* col = palette()[static_cast<std::size_t>(id) % palette().size()];
        c.polyline(pts, col, 1.2);
        c.body << "<rect class=\"start\" x=\"" << fmt(c.px(pts.front().x) - 4) << "\" y=\"" << fmt(c.py(pts.front().y) - 4)
               << "\" width=\"8\" height=\"8\" fill=\"" << col << "\"/>\n";
        c.body << "<circle class=\"end\" cx=\"" << fmt(c.px(pts.back().x)) << "\" cy=\"" << fmt(c.py(pts.back().y))
               << "\" r=\"4\" fill=\"" << col << "\"/>\n";
    }
    c.write(os, title, "x (m)", "y (m)");
}

/// Grid heatmap; each in-area cell carries its exact value in `data-v`.
inline void heatmap_svg(std::ostream& os, const CoverageMap& m, const std::string& title = "coverage",
                        double vmin = 0.0, double vmax = 1.0) {
    Range xr{m.origin.x, m.origin.x + m.cols * m.cell_size};
    Range yr{m.origin.y, m.origin.y + m.rows * m.cell_size};
    if (m.cols == 0 || m.rows == 0) {
        xr = {};
        yr = {};
    }
    Canvas c(xr, yr, true);
    const double span = vmax > vmin ? vmax - vmin : 1.0;
    for (int r = 0; r < m.rows; ++r) {
        for (int col = 0; col < m.cols; ++col) {
            const double v = m.values[static_cast<std::size_t>(r) * static_cast<std::size_t>(m.cols) +
                                      static_cast<std::size_t>(col)];
            if (std::isnan(v) || v == -1.0) {
                continue;
            }
            const double u = std::clamp((v - vmin) / span, 0.0, 1.0);
            const int red = static_cast<int>(std::lround(255 * u));
            const int blue = static_cast<int>(std::lround(255 * (1.0 - u)));
            const double x = m.origin.x + col * m.cell_size;
            const double y = m.origin.y + (r + 1) * m.cell_size;
            c.body << "<rect class=\"cell\" x=\"" << fmt(c.px(x)) << "\" y=\"" << fmt(c.py(y)) << "\" width=\""
                   << fmt(c.sx(m.cell_size)) << "\" height=\"" << fmt(c.sy(m.cell_size)) << "\" fill=\"rgb(" << red
                   << ",64," << blue << ")\" data-col=\"" << col << "\" data-row=\"" << r << "\" data-v=\""
                   << neat::format_real(v) << "\"/>\n";
        }
    }
    c.write(os, title, "x (m)", "y (m)");
}

/// Value range of the in-area cells of a map.
inline Range value_range(const CoverageMap& m) {
    Range r;
    for (double v : m.values) {
        if (!std::isnan(v) && v != -1.0) {
            r.include(v);
        }
    }
    return r;
}

/// One curve per run (champion fitness by generation); the three runs with
/// the highest final best-so-far fitness are red, the rest grey, and the
/// across-run mean is black over a mean +- std band.
inline void fitness_curves_svg(std::ostream& os, const std::vector<RunArchive>& runs,
                               const std::string& title = "fitness") {
    Range xr;
    Range yr;
    std::size_t gens = 0;
    for (const auto& a : runs) {
        gens = std::max(gens, a.generations.size());
        for (const auto& g : a.generations) {
            xr.include(g.generation);
            yr.include(g.champion_fitness);
        }
    }
    std::vector<double> mean(gens, 0.0);
    std::vector<double> sd(gens, 0.0);
    for (std::size_t g = 0; g < gens; ++g) {
        std::vector<double> v;
        for (const auto& a : runs) {
            if (g < a.generations.size()) {
                v.push_back(a.generations[g].champion_fitness);
            }
        }
        const auto s = summarize(v);
        mean[g] = s.mean;
        sd[g] = s.stddev;
        yr.include(s.mean - s.stddev);
        yr.include(s.mean + s.stddev);
    }
    Canvas c(xr, yr);
    if (gens > 0) {
        std::vector<Vec2> band;
        for (std::size_t g = 0; g < gens; ++g) {
            band.push_back({static_cast<double>(g), mean[g] + sd[g]});
        }
        for (std::size_t g = gens; g-- > 0;) {
            band.push_back({static_cast<double>(g), mean[g] - sd[g]});
        }
        c.polygon(band, "#999", "none", "fill-opacity=\"0.3\" class=\"band\"");
    }
    std::vector<std::size_t> order(runs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    auto final_best = [&](std::size_t i) {
        return runs[i].generations.empty() ? -std::numeric_limits<double>::infinity()
                                           : runs[i].generations.back().best_so_far;
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return final_best(a) > final_best(b); });
    std::vector<char> top(runs.size(), 0);
    for (std::size_t k = 0; k < std::min<std::size_t>(3, order.size()); ++k) {
        top[order[k]] = 1;
    }
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < runs.size(); ++i) {
            if (top[i] != pass) {
                continue;
            }
            std::vector<Vec2> pts;
            for (const auto& g : runs[i].generations) {
                pts.push_back({static_cast<double>(g.generation), g.champion_fitness});
            }
            c.polyline(pts, top[i] ? "red" : "#aaa", top[i] ? 1.6 : 1.0,
                       std::string("class=\"run") + (top[i] ? " best" : "") + "\" data-seed=\"" +
                           std::to_string(runs[i].seed) + "\"");
        }
    }
    std::vector<Vec2> mpts;
    for (std::size_t g = 0; g < gens; ++g) {
        mpts.push_back({static_cast<double>(g), mean[g]});
    }
    c.polyline(mpts, "black", 2.0, "class=\"mean\"");
    c.write(os, title, "generation", "champion fitness");
}

/// CSV behind fitness_curves_svg: generation, one column per run seed, mean, std.
inline void fitness_curves_csv(std::ostream& os, const std::vector<RunArchive>& runs) {
    std::size_t gens = 0;
    os << "generation";
    for (const auto& a : runs) {
        os << ",run_" << a.seed;
        gens = std::max(gens, a.generations.size());
    }
    os << ",mean,std\n";
    for (std::size_t g = 0; g < gens; ++g) {
        os << g;
        std::vector<double> v;
        for (const auto& a : runs) {
            os << ',';
            if (g < a.generations.size()) {
                os << neat::format_real(a.generations[g].champion_fitness);
                v.push_back(a.generations[g].champion_fitness);
            }
        }
        const auto s = summarize(v);
        os << ',' << neat::format_real(s.mean) << ',' << neat::format_real(s.stddev) << '\n';
    }
}

/// Line chart of selected metric columns over time (all columns when empty).
inline void metrics_svg(std::ostream& os, const MetricSeries& m, std::vector<std::string> columns = {},
                        const std::string& title = "metrics") {
    if (columns.empty()) {
        columns = m.names;
    }
    Range xr;
    Range yr;
    for (double t : m.time) {
        xr.include(t);
    }
    for (const auto& name : columns) {
        for (double v : m.column(name)) {
            yr.include(v);
        }
    }
    Canvas c(xr, yr);
    std::size_t k = 0;
    for (const auto& name : columns) {
        const auto& col = m.column(name);
        std::vector<Vec2> pts;
        for (std::size_t i = 0; i < m.time.size(); ++i) {
            if (std::isfinite(col[i])) {
                pts.push_back({m.time[i], col[i]});
            }
        }
        const char* colour = palette()[k++ % palette().size()];
        c.polyline(pts, colour, 1.5, "class=\"series\" data-name=\"" + Canvas::escape(name) + "\"");
    }
    c.write(os, title, "t (s)", columns.size() == 1 ? columns.front() : std::string("value"));
}

}  // namespace swarmevo::plot
