#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hardy/error.hpp"

namespace hardy {

/// Floats in tables: 9 significant digits, locale independent.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/**
 * A CSV table with a fixed header. Rows are checked against the header
 * width so a scenario cannot drift from its declared schema.
 */
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    class Row {
    public:
        Row& operator<<(const std::string& s) {
            cells_.push_back(s);
            return *this;
        }
        Row& operator<<(const char* s) { return *this << std::string(s); }
        Row& operator<<(double v) { return *this << format_number(v); }
        Row& operator<<(int v) { return *this << std::to_string(v); }
        Row& operator<<(std::size_t v) { return *this << std::to_string(v); }
        Row& operator<<(bool v) { return *this << std::string(v ? "1" : "0"); }

    private:
        friend class CsvTable;
        std::vector<std::string> cells_;
    };

    void add(const Row& row) {
        if (row.cells_.size() != header_.size()) {
            throw NumericalError("row has " + std::to_string(row.cells_.size()) + " cells, schema has " +
                                 std::to_string(header_.size()));
        }
        rows_.push_back(row.cells_);
    }

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    /// Index of a column; throws for unknown names.
    std::size_t column(const std::string& name) const {
        auto it = std::find(header_.begin(), header_.end(), name);
        if (it == header_.end()) throw ConfigError("no column '" + name + "'");
        return static_cast<std::size_t>(it - header_.begin());
    }

    void write(std::ostream& os) const {
        write_line(os, header_);
        for (const auto& r : rows_) write_line(os, r);
    }

private:
    static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << quote(cells[i]);
        }
        os << '\n';
    }

    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += '"';
            out += c;
        }
        return out + "\"";
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// ---------------------------------------------------------------------------
// Least-squares fits

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// y ≈ intercept + slope·x by least squares. R² is 1 when y is constant and fitted exactly.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw NumericalError("line fit needs at least two points");
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = x[static_cast<std::size_t>(i)];
        b(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
    LineFit f{c(1), c(0), 0.0};
    const double mean = b.mean();
    const double ss_tot = (b.array() - mean).square().sum();
    const double ss_res = (A * c - b).squaredNorm();
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    return f;
}

/// norm ≈ a + b·log T.
inline LineFit fit_log_model(const std::vector<double>& T, const std::vector<double>& v) {
    std::vector<double> lx;
    for (double t : T) lx.push_back(std::log(t));
    return fit_line(lx, v);
}

/// norm ≈ c·T^e, fitted as log norm = log c + e·log T; slope is e.
inline LineFit fit_power_model(const std::vector<double>& T, const std::vector<double>& v) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < T.size(); ++i) {
        if (!(v[i] > 0.0)) throw NumericalError("power fit needs positive values");
        lx.push_back(std::log(T[i]));
        ly.push_back(std::log(v[i]));
    }
    return fit_line(lx, ly);
}

/// max/min of positive values; infinity when the minimum is zero.
inline double spread(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*lo <= 0.0) return *hi > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    return *hi / *lo;
}

// ---------------------------------------------------------------------------
// SVG line charts

/**
 * Minimal self-contained SVG line chart. Log axes drop non-positive points
 * (the polyline is broken there rather than clamped).
 */
class SvgChart {
public:
    struct Series {
        std::string name;
        std::vector<double> x, y;
    };

    std::string title, x_label, y_label;
    bool log_x = false, log_y = false;
    std::vector<Series> series;

    void add(std::string name, std::vector<double> x, std::vector<double> y) {
        if (x.size() != y.size()) throw NumericalError("series coordinates differ in length");
        series.push_back({std::move(name), std::move(x), std::move(y)});
    }

    void write(std::ostream& os) const {
        constexpr double W = 720, H = 480, left = 80, right = 180, top = 40, bottom = 60;
        const double pw = W - left - right, ph = H - top - bottom;
        double x0 = kNone, x1 = -kNone, y0 = kNone, y1 = -kNone;
        for (const auto& s : series) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!usable(s.x[i], log_x) || !usable(s.y[i], log_y)) continue;
                x0 = std::min(x0, tx(s.x[i]));
                x1 = std::max(x1, tx(s.x[i]));
                y0 = std::min(y0, ty(s.y[i]));
                y1 = std::max(y1, ty(s.y[i]));
            }
        }
        if (x0 > x1) x0 = 0, x1 = 1;
        if (y0 > y1) y0 = 0, y1 = 1;
        if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
        if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
        const double pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
        auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
        auto py = [&](double v) { return top + ph - (ty(v) - y0) / (y1 - y0) * ph; };

        os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
           << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
           << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
           << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
           << "</text>\n"
           << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
           << "\" fill=\"none\" stroke=\"black\"/>\n";

        for (double t : ticks(x0, x1, log_x)) {
            const double X = left + (t - x0) / (x1 - x0) * pw;
            os << "<line x1=\"" << X << "\" y1=\"" << top + ph << "\" x2=\"" << X << "\" y2=\"" << top + ph + 5
               << "\" stroke=\"black\"/>\n<text x=\"" << X << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
               << tick_label(t, log_x) << "</text>\n";
        }
        for (double t : ticks(y0, y1, log_y)) {
            const double Y = top + ph - (t - y0) / (y1 - y0) * ph;
            os << "<line x1=\"" << left - 5 << "\" y1=\"" << Y << "\" x2=\"" << left << "\" y2=\"" << Y
               << "\" stroke=\"black\"/>\n<text x=\"" << left - 8 << "\" y=\"" << Y + 4 << "\" text-anchor=\"end\">"
               << tick_label(t, log_y) << "</text>\n";
        }
        os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">" << escape(x_label)
           << "</text>\n"
           << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
           << top + ph / 2 << ")\">" << escape(y_label) << "</text>\n";

        static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                        "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
        for (std::size_t si = 0; si < series.size(); ++si) {
            const auto& s = series[si];
            const char* color = palette[si % 10];
            std::string pts;
            auto flush = [&] {
                if (!pts.empty()) {
                    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts
                       << "\"/>\n";
                }
                pts.clear();
            };
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!usable(s.x[i], log_x) || !usable(s.y[i], log_y)) {
                    flush();
                    continue;
                }
                const double X = px(s.x[i]), Y = py(s.y[i]);
                pts += format_number(X) + "," + format_number(Y) + " ";
                os << "<circle cx=\"" << X << "\" cy=\"" << Y << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
            }
            flush();
            const double ly = top + 10 + 18 * static_cast<double>(si);
            os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly
               << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n<text x=\"" << left + pw + 38 << "\" y=\""
               << ly + 4 << "\">" << escape(s.name) << "</text>\n";
        }
        os << "</svg>\n";
    }

private:
    static constexpr double kNone = 1e300;

    static bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }
    double tx(double v) const { return log_x ? std::log10(v) : v; }
    double ty(double v) const { return log_y ? std::log10(v) : v; }

    /// Tick positions in transformed coordinates.
    static std::vector<double> ticks(double lo, double hi, bool log) {
        std::vector<double> out;
        if (log) {
            const double step = std::max(1.0, std::ceil((hi - lo) / 8.0));
            for (double t = std::ceil(lo); t <= hi + 1e-9; t += step) out.push_back(t);
            if (out.empty()) out.push_back(0.5 * (lo + hi));
            return out;
        }
        const double raw = (hi - lo) / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {2.0, 5.0, 10.0}) {
            if (step >= raw) break;
            step = m * mag;
        }
        for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) out.push_back(t);
        return out;
    }

    static std::string tick_label(double t, bool log) {
        char buf[32];
        if (log) {
            if (std::abs(t - std::round(t)) < 1e-9) {
                std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::round(t)));
            } else {
                std::snprintf(buf, sizeof buf, "%.3g", std::pow(10.0, t));
            }
        } else {
            std::snprintf(buf, sizeof buf, "%.4g", std::abs(t) < 1e-12 ? 0.0 : t);
        }
        return buf;
    }

    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                case '&': out += "&amp;"; break;
                case '"': out += "&quot;"; break;
                default: out += c;
            }
        }
        return out;
    }
};

}  // namespace hardy
