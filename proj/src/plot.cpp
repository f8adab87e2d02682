#include "rlfep/harness.hpp"

#include "rlfep/csv.hpp"

#include <fstream>
#include <sstream>

namespace rlfep {

namespace {

struct Series {
    std::string label;
    std::vector<double> x, y;
    std::string color;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    std::vector<double> limits;  // horizontal red lines
    bool markers = false;        // draw points instead of lines
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Rounded tick step giving about five ticks over the span.
double tick_step(double span) {
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) return m * mag;
    }
    return 10.0 * mag;
}

void write_svg(const Chart& c, const std::filesystem::path& path) {
    constexpr double W = 720, H = 360, L = 70, R = 20, T = 36, B = 48;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : c.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (!std::isfinite(x0)) throw ParseError("nothing to plot for " + c.title, 0);
    for (double l : c.limits) {
        y0 = std::min(y0, l);
        y1 = std::max(y1, l);
    }
    if (x1 - x0 < 1e-12) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (y1 - y0 < 1e-12) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << c.title << "</text>\n";
    // Grid and ticks.
    const double xs = tick_step(x1 - x0), ys = tick_step(y1 - y0);
    for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9; t += xs) {
        o << "<line x1=\"" << num(px(t)) << "\" y1=\"" << T << "\" x2=\"" << num(px(t)) << "\" y2=\"" << H - B
          << "\" stroke=\"#ddd\"/>\n<text x=\"" << num(px(t)) << "\" y=\"" << H - B + 16
          << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
    }
    for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9; t += ys) {
        o << "<line x1=\"" << L << "\" y1=\"" << num(py(t)) << "\" x2=\"" << W - R << "\" y2=\"" << num(py(t))
          << "\" stroke=\"#ddd\"/>\n<text x=\"" << L - 6 << "\" y=\"" << num(py(t) + 4)
          << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
    }
    o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << c.x_label
      << "</text>\n";
    o << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << c.y_label << "</text>\n";
    for (double l : c.limits) {
        o << "<line x1=\"" << L << "\" y1=\"" << num(py(l)) << "\" x2=\"" << W - R << "\" y2=\"" << num(py(l))
          << "\" stroke=\"red\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
    }
    for (const auto& s : c.series) {
        if (c.markers || s.x.size() == 1) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"3\" fill=\""
                  << s.color << "\"/>\n";
            }
            continue;
        }
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) o << num(px(s.x[i])) << "," << num(py(s.y[i])) << " ";
        o << "\"/>\n";
    }
    // Legend.
    double ly = T + 14;
    for (const auto& s : c.series) {
        if (s.label.empty()) continue;
        o << "<rect x=\"" << W - R - 130 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << s.color
          << "\"/><text x=\"" << W - R - 115 << "\" y=\"" << ly << "\">" << s.label << "</text>\n";
        ly += 16;
    }
    o << "</svg>\n";
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << o.str();
}

const char* kPalette[] = {"#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

}  // namespace

std::vector<std::filesystem::path> plot_episode(const std::filesystem::path& episode_csv,
                                                const std::filesystem::path& out_dir, const EnvelopeLimits& limits) {
    const CsvTable t = read_numeric_csv(episode_csv);
    if (t.rows.empty()) throw ParseError(episode_csv.string() + " has no data rows", 0);
    std::filesystem::create_directories(out_dir);
    const auto time = t.column_values("t");
    std::vector<std::filesystem::path> out;

    auto emit = [&](const std::string& file, Chart c) {
        write_svg(c, out_dir / file);
        out.push_back(out_dir / file);
    };
    emit("alpha.svg", {"Angle of attack", "t [s]", "alpha [deg]",
                       {{"alpha", time, t.column_values("alpha_deg"), kPalette[0]}},
                       {limits.alpha_max, limits.alpha_min}});
    emit("nz.svg", {"Load factor", "t [s]", "n_z [g]", {{"n_z", time, t.column_values("nz"), kPalette[0]}},
                    {limits.nz_max, limits.nz_min}});
    emit("q.svg", {"Pitch rate", "t [s]", "q [deg/s]",
                   {{"q", time, t.column_values("q_deg_s"), kPalette[0]},
                    {"q_cmd", time, t.column_values("q_cmd_deg_s"), kPalette[3]},
                    {"q_total", time, t.column_values("q_total_deg_s"), kPalette[1]}},
                   {limits.q_max, limits.q_min}});
    emit("surfaces.svg", {"Control surfaces", "t [s]", "deflection [deg]",
                          {{"aileron", time, t.column_values("aileron_deg"), kPalette[0]},
                           {"tail", time, t.column_values("tail_deg"), kPalette[1]},
                           {"rudder", time, t.column_values("rudder_deg"), kPalette[2]}},
                          {}});
    return out;
}

std::vector<std::filesystem::path> plot_sweep(const std::filesystem::path& sweep_csv,
                                              const std::filesystem::path& out_dir, const EnvelopeLimits& limits,
                                              const std::optional<std::filesystem::path>& log_dir) {
    const auto rows = read_sweep_csv(sweep_csv);
    if (rows.empty()) throw ParseError(sweep_csv.string() + " has no data rows", 0);
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> out;
    auto emit = [&](const std::string& file, Chart c) {
        write_svg(c, out_dir / file);
        out.push_back(out_dir / file);
    };
    // Peaks per command, passing runs blue, failing runs red.
    auto peaks = [&](auto hi, auto lo) {
        Series pass_hi{"pass", {}, {}, kPalette[0]}, fail_hi{"fail", {}, {}, "red"};
        Series pass_lo{"", {}, {}, kPalette[0]}, fail_lo{"", {}, {}, "red"};
        for (const auto& r : rows) {
            auto& h = r.summary.failed ? fail_hi : pass_hi;
            auto& l = r.summary.failed ? fail_lo : pass_lo;
            h.x.push_back(r.q_cmd);
            h.y.push_back(hi(r.summary));
            l.x.push_back(r.q_cmd);
            l.y.push_back(lo(r.summary));
        }
        std::vector<Series> s;
        for (auto* p : {&pass_hi, &pass_lo, &fail_hi, &fail_lo}) {
            if (!p->x.empty()) s.push_back(*p);
        }
        return s;
    };
    Chart a{"Peak angle of attack per command", "q_cmd [deg/s]", "alpha [deg]",
            peaks([](const EpisodeSummary& s) { return s.alpha_max; },
                  [](const EpisodeSummary& s) { return s.alpha_min; }),
            {limits.alpha_max, limits.alpha_min}, true};
    emit("sweep_alpha.svg", a);
    Chart n{"Peak load factor per command", "q_cmd [deg/s]", "n_z [g]",
            peaks([](const EpisodeSummary& s) { return s.nz_max; }, [](const EpisodeSummary& s) { return s.nz_min; }),
            {limits.nz_max, limits.nz_min}, true};
    emit("sweep_nz.svg", n);
    Chart q{"Peak pitch rate per command", "q_cmd [deg/s]", "q [deg/s]",
            peaks([](const EpisodeSummary& s) { return s.q_max; }, [](const EpisodeSummary& s) { return s.q_min; }),
            {limits.q_max, limits.q_min}, true};
    emit("sweep_q.svg", q);

    if (log_dir) {
        // Overlay of every run's traces; failing runs drawn red.
        Chart oa{"Angle of attack, all runs", "t [s]", "alpha [deg]", {}, {limits.alpha_max, limits.alpha_min}};
        Chart on{"Load factor, all runs", "t [s]", "n_z [g]", {}, {limits.nz_max, limits.nz_min}};
        Chart oq{"Pitch rate, all runs", "t [s]", "q [deg/s]", {}, {limits.q_max, limits.q_min}};
        for (const auto& r : rows) {
            const auto file = *log_dir / (sweep_run_name(r.q_cmd) + ".csv");
            if (!std::filesystem::exists(file)) throw ParseError("missing run log " + file.string(), 0);
            const CsvTable t = read_numeric_csv(file);
            if (t.rows.empty()) continue;
            const std::string color = r.summary.failed ? "red" : "#1f77b466";
            const auto time = t.column_values("t");
            oa.series.push_back({"", time, t.column_values("alpha_deg"), color});
            on.series.push_back({"", time, t.column_values("nz"), color});
            oq.series.push_back({"", time, t.column_values("q_deg_s"), color});
        }
        emit("overlay_alpha.svg", oa);
        emit("overlay_nz.svg", on);
        emit("overlay_q.svg", oq);
    }
    return out;
}

}  // namespace rlfep
