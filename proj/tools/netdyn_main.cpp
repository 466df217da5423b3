// netdyn: packet-capture decoding, header time-series analysis, and
// signature scanning from one binary. Exit codes: 0 clean, 1 alerts fired,
// 2 usage error, 3 input error.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "netdyn/capture.hpp"
#include "netdyn/dynamics.hpp"
#include "netdyn/errors.hpp"
#include "netdyn/monitor.hpp"
#include "netdyn/params.hpp"
#include "netdyn/rules.hpp"
#include "netdyn/series.hpp"
#include "netdyn/textio.hpp"

namespace {

using namespace netdyn;

void emit(const std::string& path, const std::string& content) {
    if (path.empty())
        std::fwrite(content.data(), 1, content.size(), stdout);
    else
        write_text_file(path, content);
}

TimeSeries load_series(const std::string& path) {
    return series_from_csv(read_text_file(path));
}

struct RuleSelection {
    std::string rules_path;
    bool builtin = false;
    bool ack_scan = false;
};

void add_rule_flags(CLI::App* cmd, RuleSelection& sel) {
    cmd->add_option("--rules", sel.rules_path, "rule file (DSL, one rule per line)");
    cmd->add_flag("--builtin", sel.builtin, "include the builtin attack catalog");
    cmd->add_flag("--ack-scan", sel.ack_scan, "include the ack-scan probe rule");
}

// Default when nothing is selected: builtin catalog plus the ack-scan probe.
std::vector<SignatureRule> resolve_rules(const RuleSelection& sel) {
    std::vector<SignatureRule> rules;
    bool any = sel.builtin || sel.ack_scan || !sel.rules_path.empty();
    if (sel.builtin || !any) {
        const auto& cat = builtin_catalog();
        rules.insert(rules.end(), cat.begin(), cat.end());
    }
    if (sel.ack_scan || !any)
        rules.push_back(ack_scan_rule());
    if (!sel.rules_path.empty()) {
        auto extra = parse_rules(read_text_file(sel.rules_path));
        rules.insert(rules.end(), extra.begin(), extra.end());
    }
    return rules;
}

int cmd_extract(const std::string& pcap, const std::string& out) {
    PcapContents capture = read_capture_file(pcap);
    std::vector<ParamSample> all;
    for (const auto& record : capture.records) {
        DecodedPacket packet;
        try {
            packet = decode_packet(record, capture.link_type);
        } catch (const DecodeError&) {
            continue;
        } catch (const MalformedHeaderError&) {
            continue;
        }
        auto samples = extract_params(packet);
        all.insert(all.end(), samples.begin(), samples.end());
    }
    emit(out, samples_to_csv(all));
    return 0;
}

int cmd_bin(const std::string& samples_path, double tau, int param_id,
            const std::string& agg, const std::string& gap, const std::string& out) {
    auto samples = samples_from_csv(read_text_file(samples_path));
    std::vector<ParamSample> selected;
    std::vector<int> seen;
    for (const auto& s : samples) {
        if (param_id == 0 || s.param == param_id) selected.push_back(s);
        if (std::find(seen.begin(), seen.end(), s.param) == seen.end())
            seen.push_back(s.param);
    }
    if (param_id == 0 && seen.size() > 1)
        throw CLI::ValidationError(
            "--param", "input holds " + std::to_string(seen.size()) +
                           " parameters; pick one with --param");
    auto a = aggregation_from_string(agg);
    if (!a) throw CLI::ValidationError("--aggregation", "unknown mode '" + agg + "'");
    auto g = gap_policy_from_string(gap);
    if (!g) throw CLI::ValidationError("--gap", "unknown policy '" + gap + "'");
    emit(out, series_to_csv(bin_series(std::move(selected), tau, *a, *g)));
    return 0;
}

int cmd_fnn(const std::string& series_path, int max_dim, int delay, double r_tol,
            double a_tol, double threshold, const std::string& out) {
    TimeSeries series = load_series(series_path);
    int T = delay > 0 ? delay : autocorr_first_min_delay(series);
    FnnCurve curve = fnn_curve(series, max_dim, T, r_tol, a_tol);
    auto d = estimate_dimension(curve, threshold);
    std::cout << "delay " << T << "\n";
    std::cout << "dimension " << (d ? std::to_string(*d) : std::string("none")) << "\n";
    emit(out, fnn_curve_to_csv(curve));
    return 0;
}

int cmd_embed(const std::string& series_path, int d, int delay, const std::string& out) {
    TimeSeries series = load_series(series_path);
    int T = delay > 0 ? delay : autocorr_first_min_delay(series);
    emit(out, vectors_to_csv(embed(series, d, T)));
    return 0;
}

int cmd_project(const std::string& vectors_path, const std::vector<int>& axes,
                const std::string& out) {
    DelayVectors vectors = vectors_from_csv(read_text_file(vectors_path));
    emit(out, points_to_csv(project(vectors, axes)));
    return 0;
}

int cmd_baseline_fit(const std::string& series_path, int d, int delay,
                     std::vector<int> axes, int resolution, const std::string& out) {
    TimeSeries series = load_series(series_path);
    int T = delay > 0 ? delay : autocorr_first_min_delay(series);
    if (axes.empty()) axes = {0, 1};
    BaselineFile file;
    file.embed_dim = d;
    file.embed_delay = T;
    file.model = fit_occupancy(embed(series, d, T), axes,
                               std::vector<int>(axes.size(), resolution));
    emit(out, baseline_to_text(file));
    return 0;
}

int cmd_baseline_score(const std::string& series_path, const std::string& model_path,
                       const std::string& out) {
    BaselineFile file = baseline_from_text(read_text_file(model_path));
    TimeSeries series = load_series(series_path);
    DelayVectors vectors = embed(series, file.embed_dim, file.embed_delay);
    std::string csv = "index,score\n";
    std::vector<double> point(file.model.grid_dim());
    for (std::size_t n = 0; n < vectors.count(); ++n) {
        for (std::size_t a = 0; a < file.model.axes.size(); ++a)
            point[a] = vectors.at(n, file.model.axes[a]);
        csv += std::to_string(n) + "," +
               format_number(novelty_score(file.model, point)) + "\n";
    }
    emit(out, csv);
    return 0;
}

int cmd_scan(const std::string& pcap, const RuleSelection& sel, double speed,
             bool unlimited, const std::string& out) {
    PcapContents capture = read_capture_file(pcap);
    RuleEngine engine(resolve_rules(sel));
    std::string lines;
    replay(capture, speed, unlimited, [&](const CaptureRecord& record, std::size_t) {
        DecodedPacket packet;
        try {
            packet = decode_packet(record, capture.link_type);
        } catch (const DecodeError&) {
            return;
        } catch (const MalformedHeaderError&) {
            return;
        }
        for (const Alert& alert : engine.on_packet(packet)) {
            std::string line = alert_line(alert);
            lines += line + "\n";
            if (!out.empty() || !unlimited) {
                std::cout << line << "\n";
                std::cout.flush();
            }
        }
    });
    if (out.empty() && unlimited)
        std::fwrite(lines.data(), 1, lines.size(), stdout);
    else if (!out.empty())
        write_text_file(out, lines);
    return lines.empty() ? 0 : 1;
}

int cmd_monitor(const std::string& pcap, const RuleSelection& sel,
                const std::string& config_path, const std::string& out_dir) {
    MonitorConfig config;
    if (config_path.empty()) {
        WindowSpec w;
        w.name = "default";
        w.scale = 5.0;
        w.param_ids = {param::ip_protocol_id};
        w.fnn = FnnSettings{};
        config.windows.push_back(std::move(w));
    } else {
        config = parse_monitor_config(read_text_file(config_path));
    }
    PcapContents capture = read_capture_file(pcap);
    MonitorReport report = run_monitor(capture, resolve_rules(sel), config);
    if (out_dir.empty())
        std::cout << monitor_report_text(report);
    else
        write_monitor_report(report, out_dir);
    return report.alerts.empty() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"packet-capture header dynamics and signature analysis"};
    app.require_subcommand(1);
    int exit_code = 0;

    // extract
    auto* extract = app.add_subcommand("extract", "pcap -> static-parameter samples CSV");
    std::string ex_pcap, ex_out;
    extract->add_option("pcap", ex_pcap, "capture file")->required();
    extract->add_option("-o,--out", ex_out, "output CSV (default stdout)");
    extract->callback([&] { exit_code = cmd_extract(ex_pcap, ex_out); });

    // bin
    auto* bin = app.add_subcommand("bin", "samples CSV -> uniform series CSV");
    std::string bin_in, bin_out, bin_agg = "last", bin_gap = "hold_last";
    double bin_tau = 5.0;
    int bin_param = 0;
    bin->add_option("samples", bin_in, "samples CSV from extract")->required();
    bin->add_option("--tau", bin_tau, "bin width in seconds (default 5)");
    bin->add_option("--param", bin_param, "parameter id to bin (required for multi-parameter input)");
    bin->add_option("--aggregation", bin_agg, "last|mean|mode|count (default last)");
    bin->add_option("--gap", bin_gap, "hold_last|zero (default hold_last)");
    bin->add_option("-o,--out", bin_out, "output CSV (default stdout)");
    bin->callback([&] {
        exit_code = cmd_bin(bin_in, bin_tau, bin_param, bin_agg, bin_gap, bin_out);
    });

    // fnn
    auto* fnn = app.add_subcommand("fnn", "series CSV -> FNN curve and dimension estimate");
    std::string fnn_in, fnn_out;
    int fnn_max_dim = 8, fnn_delay = 0;
    double fnn_rtol = kDefaultRtol, fnn_atol = kDefaultAtol;
    double fnn_threshold = kDefaultFnnThreshold;
    fnn->add_option("series", fnn_in, "series CSV")->required();
    fnn->add_option("--max-dim", fnn_max_dim, "largest dimension to test (default 8)");
    fnn->add_option("--delay", fnn_delay, "embedding delay in samples (default: autocorrelation minimum)");
    fnn->add_option("--rtol", fnn_rtol, "distance-stretch tolerance (default 15)");
    fnn->add_option("--atol", fnn_atol, "attractor-size tolerance (default 2)");
    fnn->add_option("--threshold", fnn_threshold, "dimension acceptance fraction (default 0.05)");
    fnn->add_option("-o,--out", fnn_out, "curve CSV (default stdout)");
    fnn->callback([&] {
        exit_code = cmd_fnn(fnn_in, fnn_max_dim, fnn_delay, fnn_rtol, fnn_atol,
                            fnn_threshold, fnn_out);
    });

    // embed
    auto* embed_cmd = app.add_subcommand("embed", "series CSV -> delay-vector CSV");
    std::string em_in, em_out;
    int em_d = 2, em_delay = 0;
    embed_cmd->add_option("series", em_in, "series CSV")->required();
    embed_cmd->add_option("-d,--dim", em_d, "embedding dimension (default 2)");
    embed_cmd->add_option("-T,--delay", em_delay, "delay in samples (default: autocorrelation minimum)");
    embed_cmd->add_option("-o,--out", em_out, "output CSV (default stdout)");
    embed_cmd->callback([&] { exit_code = cmd_embed(em_in, em_d, em_delay, em_out); });

    // project
    auto* project_cmd = app.add_subcommand("project", "delay vectors -> 2D/3D point CSV");
    std::string pr_in, pr_out;
    std::vector<int> pr_axes{0, 1};
    project_cmd->add_option("vectors", pr_in, "delay-vector CSV")->required();
    project_cmd->add_option("--axes", pr_axes, "2 or 3 component indices (default 0 1)")
        ->expected(2, 3);
    project_cmd->add_option("-o,--out", pr_out, "output CSV (default stdout)");
    project_cmd->callback([&] { exit_code = cmd_project(pr_in, pr_axes, pr_out); });

    // baseline fit / score
    auto* baseline = app.add_subcommand("baseline", "occupancy-grid novelty baseline");
    baseline->require_subcommand(1);
    auto* fit = baseline->add_subcommand("fit", "train a model from a normal-traffic series");
    std::string fit_in, fit_out;
    int fit_d = 3, fit_delay = 0, fit_res = 32;
    std::vector<int> fit_axes;
    fit->add_option("series", fit_in, "training series CSV")->required();
    fit->add_option("-d,--dim", fit_d, "embedding dimension (default 3)");
    fit->add_option("-T,--delay", fit_delay, "delay in samples (default: autocorrelation minimum)");
    fit->add_option("--axes", fit_axes, "projection axes (default 0 1)")->expected(2, 3);
    fit->add_option("--resolution", fit_res, "cells per axis (default 32)");
    fit->add_option("-o,--out", fit_out, "model file (default stdout)");
    fit->callback([&] {
        exit_code = cmd_baseline_fit(fit_in, fit_d, fit_delay, fit_axes, fit_res, fit_out);
    });
    auto* score = baseline->add_subcommand("score", "score a series against a model");
    std::string sc_in, sc_model, sc_out;
    score->add_option("series", sc_in, "series CSV")->required();
    score->add_option("--model", sc_model, "model file from 'baseline fit'")->required();
    score->add_option("-o,--out", sc_out, "scores CSV (default stdout)");
    score->callback([&] { exit_code = cmd_baseline_score(sc_in, sc_model, sc_out); });

    // scan
    auto* scan = app.add_subcommand("scan", "pcap + rules -> alert lines");
    std::string scan_pcap, scan_out, scan_speed = "unlimited";
    RuleSelection scan_rules;
    scan->add_option("pcap", scan_pcap, "capture file")->required();
    add_rule_flags(scan, scan_rules);
    scan->add_option("--speed", scan_speed, "replay speed factor or 'unlimited' (default)");
    scan->add_option("-o,--out", scan_out, "alert file (default stdout)");
    scan->callback([&] {
        bool unlimited = scan_speed == "unlimited";
        double speed = 0.0;
        if (!unlimited) {
            auto s = parse_double(scan_speed);
            if (!s) throw CLI::ValidationError("--speed", "expected a number or 'unlimited'");
            speed = *s;
        }
        exit_code = cmd_scan(scan_pcap, scan_rules, speed, unlimited, scan_out);
    });

    // monitor
    auto* monitor = app.add_subcommand("monitor", "pcap + windows config -> report directory");
    std::string mon_pcap, mon_config, mon_out;
    RuleSelection mon_rules;
    monitor->add_option("pcap", mon_pcap, "capture file")->required();
    monitor->add_option("--config", mon_config, "window config file (default: one 5 s window)");
    add_rule_flags(monitor, mon_rules);
    monitor->add_option("-o,--out", mon_out, "report directory (default: print report)");
    monitor->callback([&] {
        exit_code = cmd_monitor(mon_pcap, mon_rules, mon_config, mon_out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const netdyn::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return exit_code;
}
