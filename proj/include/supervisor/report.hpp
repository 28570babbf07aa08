#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "supervisor/engine.hpp"
#include "supervisor/harness.hpp"
#include "supervisor/text.hpp"

namespace supervisor {

inline constexpr std::array<const char*, 7> kScoreColumns = {
    kCheckStatic, kCheckRssLon, kCheckRssLat, kCheckPoseMatch,
    kCheckFriction, kCheckDynLimits, kCheckRules,
};

/// Per-frame score timeline of the driving candidate. Locale independent and
/// byte-stable for identical verdict sequences.
inline void write_scores_csv(std::ostream& out, std::span<const Verdict> verdicts) {
    out << "t_abs,s_tot";
    for (const char* col : kScoreColumns) {
        out << ',' << col;
    }
    out << ",action\n";
    for (const Verdict& v : verdicts) {
        out << detail::format_double(v.t_abs) << ',' << (v.s_tot ? 1 : 0);
        for (const char* col : kScoreColumns) {
            const CheckResult* c = v.driving.find(col);
            out << ',' << (c ? detail::format_double(c->margin) : "nan");
        }
        out << ',' << to_string(v.action) << '\n';
    }
}

struct LatencyStats {
    double median_us{0.0};
    double p99_us{0.0};
    double max_us{0.0};
};

inline LatencyStats compute_latency_stats(std::vector<double> samples) {
    LatencyStats stats;
    if (samples.empty()) {
        return stats;
    }
    std::sort(samples.begin(), samples.end());
    const auto rank = [&samples](double q) {
        const std::size_t i = static_cast<std::size_t>(q * (samples.size() - 1));
        return samples[i];
    };
    stats.median_us = rank(0.50);
    stats.p99_us = rank(0.99);
    stats.max_us = samples.back();
    return stats;
}

struct RunReport {
    std::string scenario;
    bool pass{false};
    std::string reason;
    std::optional<SafetyEnvelope> envelope;
    std::optional<double> fire_time;
    std::map<std::string, double> min_margins;  ///< per check, over all frames (driving)
    LatencyStats latency;
    std::size_t frames{0};
};

inline RunReport build_run_report(const Scenario& sc, const ReplayResult& replay_result,
                                  const GradeResult& grade_result,
                                  const std::optional<SafetyEnvelope>& envelope) {
    RunReport rep;
    rep.scenario = sc.name;
    rep.pass = grade_result.pass;
    rep.reason = grade_result.reason;
    rep.envelope = envelope;
    rep.fire_time = grade_result.fire_time;
    rep.frames = replay_result.verdicts.size();
    for (const char* col : kScoreColumns) {
        double lo = std::numeric_limits<double>::infinity();
        bool seen = false;
        for (const Verdict& v : replay_result.verdicts) {
            if (const CheckResult* c = v.driving.find(col)) {
                lo = std::min(lo, c->margin);
                seen = true;
            }
        }
        if (seen) {
            rep.min_margins[col] = lo;
        }
    }
    rep.latency = compute_latency_stats(replay_result.latency_us);
    return rep;
}

inline void write_report_txt(std::ostream& out, const RunReport& rep) {
    out << "scenario: " << rep.scenario << '\n';
    out << "frames: " << rep.frames << '\n';
    out << "result: " << (rep.pass ? "PASS" : "FAIL") << '\n';
    out << "reason: " << rep.reason << '\n';
    if (rep.envelope) {
        out << "envelope: [" << detail::format_double(rep.envelope->t_earliest) << ", "
            << detail::format_double(rep.envelope->t_latest) << "]\n";
    }
    if (rep.fire_time) {
        out << "first_fire: " << detail::format_double(*rep.fire_time) << '\n';
    }
    for (const auto& [name, margin] : rep.min_margins) {
        out << "min_margin." << name << ": " << detail::format_double(margin) << '\n';
    }
    out << "latency_median_us: " << detail::format_double(rep.latency.median_us) << '\n';
    out << "latency_p99_us: " << detail::format_double(rep.latency.p99_us) << '\n';
    out << "latency_max_us: " << detail::format_double(rep.latency.max_us) << '\n';
}

/// Self-contained SVG of the score timeline: one polyline per check margin
/// (clipped to a fixed band) plus the overall rating strip.
inline void write_scores_svg(std::ostream& out, std::span<const Verdict> verdicts) {
    const int width = 960;
    const int height = 420;
    const int pad = 40;
    const double band = 10.0;  // margins clipped to [-band, band]
    const double t0 = verdicts.empty() ? 0.0 : verdicts.front().t_abs;
    const double t1 = verdicts.empty() ? 1.0 : std::max(verdicts.back().t_abs, t0 + 1e-9);
    const auto x_of = [&](double t) { return pad + (t - t0) / (t1 - t0) * (width - 2 * pad); };
    const auto y_of = [&](double m) {
        const double c = std::clamp(m, -band, band);
        return height - pad - (c + band) / (2.0 * band) * (height - 2 * pad);
    };
    const std::array<const char*, 7> colors = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                               "#9467bd", "#8c564b", "#17becf"};
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // unsafe frames as a red strip
    for (const Verdict& v : verdicts) {
        if (!v.s_tot) {
            out << "<rect x=\"" << detail::format_double(x_of(v.t_abs) - 1.0) << "\" y=\"" << pad
                << "\" width=\"2\" height=\"" << height - 2 * pad << "\" fill=\"#fdd\"/>\n";
        }
    }
    // zero line
    out << "<line x1=\"" << pad << "\" y1=\"" << detail::format_double(y_of(0.0)) << "\" x2=\""
        << width - pad << "\" y2=\"" << detail::format_double(y_of(0.0))
        << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    for (std::size_t ci = 0; ci < kScoreColumns.size(); ++ci) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[ci] << "\" stroke-width=\"1.5\" points=\"";
        for (const Verdict& v : verdicts) {
            const CheckResult* c = v.driving.find(kScoreColumns[ci]);
            if (c == nullptr || std::isnan(c->margin)) {
                continue;
            }
            out << detail::format_double(x_of(v.t_abs)) << ',' << detail::format_double(y_of(c->margin))
                << ' ';
        }
        out << "\"/>\n";
        out << "<text x=\"" << pad + 8 << "\" y=\"" << pad + 16 + 16 * static_cast<int>(ci)
            << "\" fill=\"" << colors[ci] << "\" font-size=\"12\" font-family=\"sans-serif\">"
            << kScoreColumns[ci] << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace supervisor
