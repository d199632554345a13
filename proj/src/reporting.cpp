#include "stimnet/reporting.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stimnet/version.hpp"

namespace stimnet {

namespace {

const char* kCsvHeader = "iteration,phase,source,stimulus_hex,response_hex,status,newly_hit,coverage";

std::string hex_join(const std::vector<std::uint64_t>& values) {
    std::string out;
    char buf[24];
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += '|';
        std::snprintf(buf, sizeof buf, "%llx", static_cast<unsigned long long>(values[i]));
        out += buf;
    }
    return out;
}

std::vector<std::uint64_t> hex_split(const std::string& field) {
    std::vector<std::uint64_t> values;
    std::stringstream ss(field);
    std::string item;
    while (std::getline(ss, item, '|')) {
        values.push_back(std::stoull(item, nullptr, 16));
    }
    return values;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) {
        fields.push_back(item);
    }
    // a trailing empty field (e.g. empty newly_hit) is eaten by getline
    while (fields.size() < 8) fields.push_back("");
    return fields;
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << body;
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

}  // namespace

std::string run_log_to_string(const std::vector<RunRecord>& records) {
    std::string out = kCsvHeader;
    out += '\n';
    char buf[32];
    for (const auto& r : records) {
        out += std::to_string(r.iteration);
        out += r.phase == Phase::Train ? ",TRAIN," : ",TEST,";
        out += r.source == StimulusSource::Random ? "RANDOM," : "MODEL,";
        out += hex_join(r.stimulus.values);
        out += ',';
        out += hex_join(r.response.values);
        out += r.status == TestStatus::Pass ? ",PASS," : ",FAIL,";
        for (std::size_t i = 0; i < r.newly_hit.size(); ++i) {
            if (i) out += ';';
            out += std::to_string(r.newly_hit[i]);
        }
        std::snprintf(buf, sizeof buf, ",%.6f", r.coverage);
        out += buf;
        out += '\n';
    }
    return out;
}

void write_run_log(const std::vector<RunRecord>& records, const std::string& path) {
    write_text_file(path, run_log_to_string(records));
}

std::vector<RunRecord> read_run_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw std::runtime_error(path + ": bad run-log header");
    }
    std::vector<RunRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        RunRecord r;
        r.iteration = std::stoull(fields[0]);
        if (fields[1] == "TRAIN") {
            r.phase = Phase::Train;
        } else if (fields[1] == "TEST") {
            r.phase = Phase::Test;
        } else {
            throw std::runtime_error(path + ": bad phase " + fields[1]);
        }
        if (fields[2] == "RANDOM") {
            r.source = StimulusSource::Random;
        } else if (fields[2] == "MODEL") {
            r.source = StimulusSource::Model;
        } else {
            throw std::runtime_error(path + ": bad source " + fields[2]);
        }
        r.stimulus.values = hex_split(fields[3]);
        r.response.values = hex_split(fields[4]);
        if (fields[5] == "PASS") {
            r.status = TestStatus::Pass;
        } else if (fields[5] == "FAIL") {
            r.status = TestStatus::Fail;
        } else {
            throw std::runtime_error(path + ": bad status " + fields[5]);
        }
        if (!fields[6].empty()) {
            std::stringstream ss(fields[6]);
            std::string id;
            while (std::getline(ss, id, ';')) {
                r.newly_hit.push_back(std::stoull(id));
            }
        }
        r.coverage = std::stod(fields[7]);
        records.push_back(std::move(r));
    }
    return records;
}

namespace {

nlohmann::json stats_to_json(const MethodStats& stats) {
    nlohmann::json j;
    j["median_iterations"] =
        stats.median_iterations ? nlohmann::json(*stats.median_iterations) : nlohmann::json();
    j["min_iterations"] =
        stats.min_iterations ? nlohmann::json(*stats.min_iterations) : nlohmann::json();
    j["max_iterations"] =
        stats.max_iterations ? nlohmann::json(*stats.max_iterations) : nlohmann::json();
    j["converged_count"] = stats.converged_count;
    j["seeds"] = nlohmann::json::array();
    for (const auto& s : stats.seeds) {
        nlohmann::json js;
        js["seed"] = s.seed;
        js["converged"] = s.converged;
        js["iterations"] = s.iterations ? nlohmann::json(*s.iterations) : nlohmann::json();
        js["total_iterations"] = s.total_iterations;
        js["coverage"] = s.final_coverage;
        j["seeds"].push_back(std::move(js));
    }
    return j;
}

MethodStats stats_from_json(const nlohmann::json& j) {
    MethodStats stats;
    if (!j.at("median_iterations").is_null()) {
        stats.median_iterations = j.at("median_iterations").get<std::size_t>();
    }
    if (!j.at("min_iterations").is_null()) {
        stats.min_iterations = j.at("min_iterations").get<std::size_t>();
    }
    if (!j.at("max_iterations").is_null()) {
        stats.max_iterations = j.at("max_iterations").get<std::size_t>();
    }
    stats.converged_count = j.at("converged_count").get<std::size_t>();
    for (const auto& js : j.at("seeds")) {
        SeedOutcome s;
        s.seed = js.at("seed").get<std::uint64_t>();
        s.converged = js.at("converged").get<bool>();
        if (!js.at("iterations").is_null()) {
            s.iterations = js.at("iterations").get<std::size_t>();
        }
        s.total_iterations = js.at("total_iterations").get<std::size_t>();
        s.final_coverage = js.at("coverage").get<double>();
        stats.seeds.push_back(std::move(s));
    }
    return stats;
}

}  // namespace

nlohmann::json report_to_json(const ExperimentReport& report) {
    nlohmann::json j;
    j["schema"] = 1;
    j["tool"] = "stimnet";
    j["version"] = report.tool_version;
    j["timestamp"] = report.timestamp;
    j["dut"] = report.dut;
    j["seeds_per_width"] = report.seeds_per_width;
    nlohmann::json config;
    config["seed"] = report.base_seed;
    config["iteration_cap"] = report.iteration_cap;
    config["goal"] = report.goal;
    config["train_transactions"] = report.train_transactions
                                       ? nlohmann::json(*report.train_transactions)
                                       : nlohmann::json();
    config["retrain_interval"] = report.retrain_interval;
    config["per_bin_model_attempts"] = report.per_bin_model_attempts;
    config["retrain_epochs"] = report.retrain_epochs;
    config["bin_order"] = report.bin_order == BinOrder::LowestFirst ? "lowest" : "random";
    j["config"] = std::move(config);
    j["results"] = nlohmann::json::array();
    for (const auto& row : report.widths) {
        nlohmann::json jr;
        jr["width"] = row.width;
        jr["random"] = stats_to_json(row.random);
        jr["ann"] = stats_to_json(row.ann);
        j["results"].push_back(std::move(jr));
    }
    return j;
}

ExperimentReport report_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("schema", 0) != 1) {
        throw std::runtime_error("unsupported report schema");
    }
    ExperimentReport report;
    report.tool_version = j.at("version").get<std::string>();
    report.timestamp = j.at("timestamp").get<std::string>();
    report.dut = j.at("dut").get<std::string>();
    report.seeds_per_width = j.at("seeds_per_width").get<std::size_t>();
    const auto& config = j.at("config");
    report.base_seed = config.at("seed").get<std::uint64_t>();
    report.iteration_cap = config.at("iteration_cap").get<std::size_t>();
    report.goal = config.at("goal").get<double>();
    if (!config.at("train_transactions").is_null()) {
        report.train_transactions = config.at("train_transactions").get<std::size_t>();
    }
    report.retrain_interval = config.at("retrain_interval").get<std::size_t>();
    report.per_bin_model_attempts = config.at("per_bin_model_attempts").get<std::size_t>();
    report.retrain_epochs = config.at("retrain_epochs").get<std::size_t>();
    report.bin_order = config.at("bin_order").get<std::string>() == "random"
                           ? BinOrder::Random
                           : BinOrder::LowestFirst;
    for (const auto& jr : j.at("results")) {
        WidthResult row;
        row.width = jr.at("width").get<unsigned>();
        row.random = stats_from_json(jr.at("random"));
        row.ann = stats_from_json(jr.at("ann"));
        report.widths.push_back(std::move(row));
    }
    return report;
}

void write_report_json(const ExperimentReport& report, const std::string& path) {
    write_text_file(path, report_to_json(report).dump(2) + "\n");
}

ExperimentReport read_report_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return report_from_json(j);
}

std::string format_table(const ExperimentReport& report) {
    const std::vector<std::string> headers = {"Width", "Constrained Random Stimuli",
                                              "ANN Based Stimuli"};
    auto cell_text = [&](const MethodStats& stats) -> std::string {
        if (stats.median_iterations) return std::to_string(*stats.median_iterations);
        return ">" + std::to_string(report.iteration_cap);
    };

    std::vector<std::array<std::string, 3>> rows;
    for (const auto& row : report.widths) {
        rows.push_back({std::to_string(row.width), cell_text(row.random), cell_text(row.ann)});
    }
    std::array<std::size_t, 3> width{};
    for (std::size_t c = 0; c < 3; ++c) {
        width[c] = headers[c].size();
        for (const auto& row : rows) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    auto emit = [&](const std::array<std::string, 3>& cells) {
        std::string line;
        for (std::size_t c = 0; c < 3; ++c) {
            if (c) line += " | ";
            line += cells[c];
            if (c + 1 < 3) line.append(width[c] - cells[c].size(), ' ');
        }
        line += '\n';
        return line;
    };

    std::string out = emit({headers[0], headers[1], headers[2]});
    for (const auto& row : rows) {
        out += emit(row);
    }
    return out;
}

ConvergenceCurve curve_from_records(const std::vector<RunRecord>& records) {
    ConvergenceCurve curve;
    curve.points.reserve(records.size());
    for (const auto& r : records) {
        curve.points.emplace_back(r.iteration, r.coverage);
    }
    return curve;
}

std::string render_convergence_svg(const std::vector<ConvergenceCurve>& curves,
                                   const std::vector<std::string>& labels) {
    if (curves.empty()) {
        throw std::invalid_argument("no curves to plot");
    }
    if (labels.size() != curves.size()) {
        throw std::invalid_argument("label count does not match curve count");
    }
    for (const auto& curve : curves) {
        if (curve.points.size() < 2) {
            throw std::invalid_argument("each curve needs at least 2 points");
        }
    }
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};
    constexpr double kW = 640, kH = 400;
    constexpr double kLeft = 60, kRight = 620, kTop = 20, kBottom = 360;

    std::size_t max_iter = 1;
    for (const auto& curve : curves) {
        for (const auto& [it, cov] : curve.points) {
            max_iter = std::max(max_iter, it);
        }
    }
    auto sx = [&](std::size_t it) {
        return kLeft + (kRight - kLeft) * static_cast<double>(it) / static_cast<double>(max_iter);
    };
    auto sy = [&](double cov) { return kBottom - (kBottom - kTop) * cov; };

    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                  "viewBox=\"0 0 %g %g\">\n",
                  kW, kH, kW, kH);
    out += buf;
    out += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";
    // axes
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                  kLeft, kBottom, kRight, kBottom);
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                  kLeft, kTop, kLeft, kBottom);
    out += buf;
    // y ticks at 0, 0.5, 1.0
    for (double tick : {0.0, 0.5, 1.0}) {
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                      kLeft - 5, sy(tick), kLeft, sy(tick));
        out += buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"end\">%.1f</text>\n",
                      kLeft - 8, sy(tick) + 4, tick);
        out += buf;
    }
    // x ticks at 0 and max
    for (std::size_t tick : {std::size_t{0}, max_iter}) {
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                      sx(tick), kBottom, sx(tick), kBottom + 5);
        out += buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">%zu</text>\n",
                      sx(tick), kBottom + 20, tick);
        out += buf;
    }
    out += "<text x=\"340\" y=\"395\" font-size=\"12\" text-anchor=\"middle\">iteration</text>\n";
    out += "<text x=\"15\" y=\"190\" font-size=\"12\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 15 190)\">coverage</text>\n";

    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = kColors[c % (sizeof kColors / sizeof kColors[0])];
        std::string points;
        for (const auto& [it, cov] : curves[c].points) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(it), sy(cov));
            points += buf;
        }
        if (!points.empty()) points.pop_back();
        out += "<polyline fill=\"none\" stroke=\"";
        out += color;
        out += "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        // legend entry
        const double ly = kTop + 16.0 * static_cast<double>(c);
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                      "stroke-width=\"1.5\"/>\n",
                      kLeft + 10, ly + 6, kLeft + 34, ly + 6, color);
        out += buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\">", kLeft + 40,
                      ly + 10);
        out += buf;
        out += labels[c];
        out += "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

void write_convergence_svg(const std::vector<ConvergenceCurve>& curves,
                           const std::vector<std::string>& labels, const std::string& path) {
    write_text_file(path, render_convergence_svg(curves, labels));
}

std::string render_comparison_svg(const ExperimentReport& report) {
    if (report.widths.empty()) {
        throw std::invalid_argument("report has no width rows");
    }
    constexpr double kLeft = 70, kRight = 620, kTop = 20, kBottom = 360;
    auto cell_value = [&](const MethodStats& stats) {
        return stats.median_iterations ? *stats.median_iterations : report.iteration_cap;
    };
    std::size_t y_max = 1;
    for (const auto& row : report.widths) {
        y_max = std::max({y_max, cell_value(row.random), cell_value(row.ann)});
    }
    const std::size_t n = report.widths.size();
    auto sx = [&](std::size_t i) {
        return n == 1 ? (kLeft + kRight) / 2
                      : kLeft + (kRight - kLeft) * static_cast<double>(i) /
                            static_cast<double>(n - 1);
    };
    auto sy = [&](std::size_t v) {
        return kBottom - (kBottom - kTop) * static_cast<double>(v) / static_cast<double>(y_max);
    };

    char buf[200];
    std::string out =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
        "viewBox=\"0 0 640 400\">\n"
        "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                  kLeft, kBottom, kRight, kBottom);
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                  kLeft, kTop, kLeft, kBottom);
    out += buf;
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">%u</text>\n",
                      sx(i), kBottom + 20, report.widths[i].width);
        out += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"end\">%zu</text>\n",
                  kLeft - 8, kTop + 4, y_max);
    out += buf;
    out += "<text x=\"345\" y=\"395\" font-size=\"12\" text-anchor=\"middle\">width</text>\n";
    out += "<text x=\"15\" y=\"190\" font-size=\"12\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 15 190)\">median iterations</text>\n";

    const char* colors[2] = {"#1f77b4", "#d62728"};
    const char* names[2] = {"random", "ann"};
    for (int m = 0; m < 2; ++m) {
        std::string points;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& stats = m == 0 ? report.widths[i].random : report.widths[i].ann;
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(i), sy(cell_value(stats)));
            points += buf;
        }
        if (!points.empty()) points.pop_back();
        out += "<polyline fill=\"none\" stroke=\"";
        out += colors[m];
        out += "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        const double ly = kTop + 16.0 * m;
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                      "stroke-width=\"1.5\"/>\n",
                      kLeft + 10, ly + 6, kLeft + 34, ly + 6, colors[m]);
        out += buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\">%s</text>\n",
                      kLeft + 40, ly + 10, names[m]);
        out += buf;
    }
    out += "</svg>\n";
    return out;
}

void write_comparison_svg(const ExperimentReport& report, const std::string& path) {
    write_text_file(path, render_comparison_svg(report));
}

}  // namespace stimnet
