// SPDX-License-Identifier: Apache-2.0
#include "clab/bench/report_io.hpp"

#include "clab/config_json.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace clab::bench {

namespace fs = std::filesystem;
using cfg::json;

namespace {

json metrics_to_json(const eval::Metrics& m)
{
    return json{{"top1_accuracy", m.top1_accuracy}, {"macro_f1", m.macro_f1}};
}

eval::Metrics metrics_from_json(const json& j)
{
    eval::Metrics m;
    m.top1_accuracy = j.value("top1_accuracy", 0.0);
    m.macro_f1 = j.value("macro_f1", 0.0);
    return m;
}

json record_to_json(const RunRecord& r, bool include_wall_time)
{
    json j;
    j["variant"] = variant_name(r.variant);
    j["protocol"] = protocol_name(r.protocol);
    j["fraction"] = r.fraction;
    j["repeat"] = r.repeat;
    j["seed"] = r.seed;
    j["status"] = r.status;
    if (r.status == "ok") {
        j["eval_metrics"] = metrics_to_json(r.eval_metrics);
        j["selection_metrics"] = metrics_to_json(r.selection_metrics);
        j["best_epoch"] = r.best_epoch;
    } else {
        j["error"] = r.error;
    }
    if (include_wall_time) j["wall_seconds"] = r.wall_seconds;
    return j;
}

RunRecord record_from_json(const json& j)
{
    RunRecord r;
    r.variant = variant_from_name(j.at("variant").get<std::string>());
    r.protocol = protocol_from_name(j.at("protocol").get<std::string>());
    r.fraction = j.at("fraction").get<Scalar>();
    r.repeat = j.at("repeat").get<Index>();
    r.seed = j.value("seed", std::uint64_t{0});
    r.status = j.value("status", std::string("ok"));
    if (j.contains("eval_metrics")) r.eval_metrics = metrics_from_json(j.at("eval_metrics"));
    if (j.contains("selection_metrics"))
        r.selection_metrics = metrics_from_json(j.at("selection_metrics"));
    r.best_epoch = j.value("best_epoch", Index{-1});
    r.wall_seconds = j.value("wall_seconds", 0.0);
    r.error = j.value("error", std::string());
    return r;
}

} // namespace

void write_record_json(const RunRecord& record, const fs::path& path)
{
    cfg::write_json_file(record_to_json(record, true), path);
}

RunRecord load_record_json(const fs::path& path)
{
    return record_from_json(cfg::load_json_file(path));
}

void write_report_json(const MetricsReport& report, const fs::path& path)
{
    json j;
    j["schema_version"] = 1;
    j["master_seed"] = report.master_seed;
    json groups = json::array();
    for (const GroupStats& g : report.groups) {
        json gj;
        gj["variant"] = variant_name(g.variant);
        gj["protocol"] = protocol_name(g.protocol);
        gj["fraction"] = g.fraction;
        gj["count"] = g.count;
        gj["accuracy_mean"] = g.accuracy_mean;
        gj["f1_mean"] = g.f1_mean;
        if (g.accuracy_sd) gj["accuracy_sd"] = *g.accuracy_sd;
        if (g.f1_sd) gj["f1_sd"] = *g.f1_sd;
        json records = json::array();
        for (const RunRecord& r : g.records) records.push_back(record_to_json(r, false));
        gj["records"] = records;
        groups.push_back(gj);
    }
    j["groups"] = groups;
    cfg::write_json_file(j, path);
}

MetricsReport load_report_json(const fs::path& path)
{
    const json j = cfg::load_json_file(path);
    MetricsReport report;
    report.master_seed = j.value("master_seed", std::uint64_t{0});
    for (const json& gj : j.value("groups", json::array())) {
        GroupStats g;
        g.variant = variant_from_name(gj.at("variant").get<std::string>());
        g.protocol = protocol_from_name(gj.at("protocol").get<std::string>());
        g.fraction = gj.at("fraction").get<Scalar>();
        g.count = gj.value("count", Index{0});
        g.accuracy_mean = gj.value("accuracy_mean", 0.0);
        g.f1_mean = gj.value("f1_mean", 0.0);
        if (gj.contains("accuracy_sd")) g.accuracy_sd = gj.at("accuracy_sd").get<Scalar>();
        if (gj.contains("f1_sd")) g.f1_sd = gj.at("f1_sd").get<Scalar>();
        for (const json& rj : gj.value("records", json::array()))
            g.records.push_back(record_from_json(rj));
        report.groups.push_back(std::move(g));
    }
    return report;
}

std::string format_cell(Scalar mean, std::optional<Scalar> sd)
{
    char buf[64];
    if (sd)
        std::snprintf(buf, sizeof(buf), "%.2f (%.2f)", 100.0 * mean, 100.0 * *sd);
    else
        std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * mean);
    return buf;
}

std::string fraction_label(Scalar fraction)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g%%", 100.0 * fraction);
    return buf;
}

namespace {

std::vector<Scalar> sorted_fractions(const MetricsReport& report, Protocol p)
{
    std::set<Scalar> fs;
    for (const GroupStats& g : report.groups)
        if (g.protocol == p) fs.insert(g.fraction);
    return {fs.begin(), fs.end()};
}

std::vector<Variant> report_variants(const MetricsReport& report, Protocol p)
{
    std::vector<Variant> out;
    for (const GroupStats& g : report.groups) {
        if (g.protocol != p) continue;
        bool seen = false;
        for (Variant v : out) seen |= v == g.variant;
        if (!seen) out.push_back(g.variant);
    }
    return out;
}

} // namespace

void write_tables(const MetricsReport& report, const fs::path& dir)
{
    fs::create_directories(dir);
    for (Protocol p : {Protocol::knn, Protocol::linear, Protocol::finetune}) {
        const auto fractions = sorted_fractions(report, p);
        if (fractions.empty()) continue;
        std::ofstream os(dir / (protocol_name(p) + ".csv"), std::ios::trunc);
        require<IngestError>(os.good(), "cannot write table under " + dir.string());
        // Macro-F1 tables in the paper's layout: rows variants, columns fractions.
        os << "variant";
        for (Scalar f : fractions) os << ',' << fraction_label(f) << " F1";
        for (Scalar f : fractions) os << ',' << fraction_label(f) << " acc";
        os << '\n';
        for (Variant v : report_variants(report, p)) {
            os << variant_display_name(v);
            for (Scalar f : fractions) {
                const GroupStats* g = report.find(v, p, f);
                os << ',' << (g ? format_cell(g->f1_mean, g->f1_sd) : "-");
            }
            for (Scalar f : fractions) {
                const GroupStats* g = report.find(v, p, f);
                os << ',' << (g ? format_cell(g->accuracy_mean, g->accuracy_sd) : "-");
            }
            os << '\n';
        }
    }
}

//==============================================================================
// SVG charts
//==============================================================================

namespace {

const char* variant_color(Variant v)
{
    switch (v) {
    case Variant::none: return "#9e9e9e";
    case Variant::supervised: return "#e07b39";
    case Variant::moco: return "#3a7bd5";
    case Variant::mocotp: return "#2e9e5b";
    }
    return "#000000";
}

std::string fmt(Scalar v)
{
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

void write_charts(const MetricsReport& report, const fs::path& dir)
{
    fs::create_directories(dir);
    for (Protocol p : {Protocol::knn, Protocol::linear, Protocol::finetune}) {
        const auto fractions = sorted_fractions(report, p);
        if (fractions.empty()) continue;
        const auto variants = report_variants(report, p);

        const Scalar width = 640.0, height = 400.0;
        const Scalar left = 60.0, right = 150.0, top = 40.0, bottom = 50.0;
        const Scalar plot_w = width - left - right;
        const Scalar plot_h = height - top - bottom;
        const Scalar group_w = plot_w / static_cast<Scalar>(fractions.size());
        const Scalar bar_w =
            group_w * 0.8 / static_cast<Scalar>(variants.size());

        std::ofstream os(dir / (protocol_name(p) + ".svg"), std::ios::trunc);
        require<IngestError>(os.good(), "cannot write chart under " + dir.string());
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width)
           << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << ' '
           << fmt(height) << "\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "<text x=\"" << fmt(left) << "\" y=\"24\" font-family=\"sans-serif\" "
              "font-size=\"16\">macro-F1 (%) by label fraction, "
           << protocol_name(p) << "</text>\n";

        // axes and horizontal grid lines every 20%
        for (int tick = 0; tick <= 100; tick += 20) {
            const Scalar y = top + plot_h * (1.0 - static_cast<Scalar>(tick) / 100.0);
            os << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(y) << "\" x2=\""
               << fmt(left + plot_w) << "\" y2=\"" << fmt(y)
               << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
            os << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(y + 4)
               << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
               << tick << "</text>\n";
        }

        for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
            const Scalar gx = left + group_w * (static_cast<Scalar>(fi) + 0.1);
            for (std::size_t vi = 0; vi < variants.size(); ++vi) {
                const GroupStats* g = report.find(variants[vi], p, fractions[fi]);
                if (!g) continue;
                const Scalar value = 100.0 * g->f1_mean;
                const Scalar x = gx + bar_w * static_cast<Scalar>(vi);
                const Scalar h = plot_h * value / 100.0;
                const Scalar y = top + plot_h - h;
                os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
                   << fmt(bar_w * 0.9) << "\" height=\"" << fmt(h) << "\" fill=\""
                   << variant_color(variants[vi]) << "\"/>\n";
                if (g->f1_sd) {
                    const Scalar sd_h = plot_h * 100.0 * *g->f1_sd / 100.0;
                    const Scalar cx = x + bar_w * 0.45;
                    os << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(y - sd_h)
                       << "\" x2=\"" << fmt(cx) << "\" y2=\""
                       << fmt(std::min(top + plot_h, y + sd_h))
                       << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
                }
            }
            os << "<text x=\"" << fmt(gx + group_w * 0.4) << "\" y=\""
               << fmt(top + plot_h + 18)
               << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
               << fraction_label(fractions[fi]) << " labels</text>\n";
        }

        // legend
        for (std::size_t vi = 0; vi < variants.size(); ++vi) {
            const Scalar y = top + 18.0 * static_cast<Scalar>(vi);
            os << "<rect x=\"" << fmt(left + plot_w + 12) << "\" y=\"" << fmt(y)
               << "\" width=\"12\" height=\"12\" fill=\"" << variant_color(variants[vi])
               << "\"/>\n";
            os << "<text x=\"" << fmt(left + plot_w + 30) << "\" y=\"" << fmt(y + 10)
               << "\" font-family=\"sans-serif\" font-size=\"12\">"
               << variant_display_name(variants[vi]) << "</text>\n";
        }
        os << "</svg>\n";
    }
}

} // namespace clab::bench
