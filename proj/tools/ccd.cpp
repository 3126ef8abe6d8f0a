// ccd: command-line entry point.
//
//   ccd fit <manifest> [--json]
//   ccd synth --out <dir> --cases N --seed S --sigma 3.0 --outliers 0.2 [--noise 0.05]
//   ccd eval --pred <dir> --truth <dir> --cutoff 0.9 --seed 0 --report out.json [--text]
//   ccd serve --port <p> --watch-folder <dir> --save-folder <dir> [--activate-word activate]

#include "ccd/ccd.hpp"
#include "ccd/http_api.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIoError = 1;
constexpr int kExitCaseFailed = 2;

int run_fit(const std::string& manifest, bool as_json, double cutoff, const ccd::RansacConfig& ransac) {
    const auto heatmap = ccd::load_heatmap(manifest);
    nlohmann::ordered_json doc;
    doc["manifest"] = manifest;
    bool any_failed = false;
    for (ccd::Side side : ccd::kSides) {
        const std::string key(ccd::side_key(side));
        if (!heatmap.has_side(side)) {
            doc[key] = nullptr;
            continue;
        }
        try {
            const auto m = ccd::measure_femur(heatmap, side, ransac, cutoff);
            doc[key] = ccd::service::measurement_json(m);
            if (!as_json) {
                std::printf("%-5s CCD %7.2f deg  neck (%.1f,%.1f)-(%.1f,%.1f)  shaft (%.1f,%.1f)-(%.1f,%.1f)%s\n",
                            std::string(ccd::to_string(side)).c_str(), m.ccd_degrees, m.neck_endpoints.first.x,
                            m.neck_endpoints.first.y, m.neck_endpoints.second.x, m.neck_endpoints.second.y,
                            m.shaft_endpoints.first.x, m.shaft_endpoints.first.y, m.shaft_endpoints.second.x,
                            m.shaft_endpoints.second.y, m.degenerate ? "  [degenerate]" : "");
            }
        } catch (const ccd::Error& e) {
            any_failed = true;
            doc[key] = {{"error", e.what()}, {"kind", ccd::to_string(e.kind())}};
            if (!as_json) std::printf("%-5s unavailable: %s\n", std::string(ccd::to_string(side)).c_str(), e.what());
        }
    }
    if (as_json) std::cout << doc.dump(2) << '\n';
    return any_failed ? kExitCaseFailed : kExitOk;
}

int run_eval(const std::string& pred, const std::string& truth, const std::string& report_path, bool text,
             const ccd::EvalOptions& options) {
    const auto cases = ccd::discover_cases(pred, truth);
    if (cases.empty()) {
        std::cerr << "no study directories with manifest.json under " << pred << '\n';
        return kExitIoError;
    }
    const auto run = ccd::evaluate_all(cases, options);
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) throw ccd::Error(ccd::ErrorKind::Io, "cannot write " + report_path);
        out << ccd::to_json(run).dump(2) << '\n';
        if (!out) throw ccd::Error(ccd::ErrorKind::Io, "write failed: " + report_path);
    }
    if (text || report_path.empty()) std::cout << ccd::format_text(run.aggregate);
    return run.aggregate.failure_count > 0 ? kExitCaseFailed : kExitOk;
}

httplib::Server* g_server = nullptr;

void handle_signal(int) {
    if (g_server != nullptr) g_server->stop();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Femur CCD angle measurement from line heatmaps"};
    app.require_subcommand(1);

    double cutoff = ccd::kDefaultCutoff;
    ccd::RansacConfig ransac;
    auto add_fit_options = [&](CLI::App* cmd) {
        cmd->add_option("--cutoff", cutoff, "probability cutoff (strict)")->check(CLI::Range(0.0, 0.999999));
        cmd->add_option("--seed", ransac.seed, "RANSAC seed");
        cmd->add_option("--residual-threshold", ransac.residual_threshold, "RANSAC inlier distance, px");
        cmd->add_option("--iterations", ransac.max_iterations, "RANSAC iterations");
        cmd->add_option("--min-inliers", ransac.min_inliers, "minimum consensus size");
        cmd->add_option("--huber-delta", ransac.huber_delta, "Huber loss threshold, px");
        cmd->add_flag("!--no-huber", ransac.huber_refinement, "skip Huber refinement");
    };

    auto* fit = app.add_subcommand("fit", "fit neck/shaft centerlines and report CCD angles");
    std::string fit_manifest;
    bool fit_json = false;
    fit->add_option("manifest", fit_manifest, "heatmap manifest")->required();
    fit->add_flag("--json", fit_json, "print JSON");
    add_fit_options(fit);

    auto* synth = app.add_subcommand("synth", "write a synthetic dataset with ground truth");
    ccd::SyntheticSpec spec;
    std::string synth_out;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--cases", spec.cases, "number of cases");
    synth->add_option("--seed", spec.seed, "generator seed");
    synth->add_option("--sigma", spec.sigma, "Gaussian line width, px");
    synth->add_option("--outliers", spec.outlier_fraction, "outlier fraction per channel");
    synth->add_option("--noise", spec.blur_noise, "uniform noise amplitude");
    synth->add_option("--width", spec.width, "raster width");
    synth->add_option("--height", spec.height, "raster height");

    auto* eval = app.add_subcommand("eval", "evaluate predictions against ground truth");
    std::string pred_dir, truth_dir, report_path;
    bool eval_text = false;
    ccd::EvalOptions eval_options;
    eval->add_option("--pred", pred_dir, "directory of prediction studies")->required();
    eval->add_option("--truth", truth_dir, "directory of truth studies")->required();
    eval->add_option("--report", report_path, "JSON report path");
    eval->add_option("--sigma", eval_options.truth_sigma, "sigma for rendering truth masks");
    eval->add_flag("--text", eval_text, "print text tables");
    add_fit_options(eval);

    auto* serve = app.add_subcommand("serve", "run the measurement HTTP service");
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string watch_folder, save_folder;
    ccd::service::ServiceOptions service_options;
    serve->add_option("--port", port, "listen port")->required();
    serve->add_option("--host", host, "listen address");
    serve->add_option("--watch-folder", watch_folder, "folder scanned by open-next")->required();
    serve->add_option("--save-folder", save_folder, "snapshot folder")->required();
    serve->add_option("--activate-word", service_options.fsm.wake_word, "voice wake word");
    add_fit_options(serve);

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) {
            return run_fit(fit_manifest, fit_json, cutoff, ransac);
        }
        if (synth->parsed()) {
            const auto manifests = ccd::write_dataset(spec, synth_out);
            std::printf("wrote %zu cases to %s\n", manifests.size(), synth_out.c_str());
            return kExitOk;
        }
        if (eval->parsed()) {
            eval_options.cutoff = cutoff;
            eval_options.ransac = ransac;
            return run_eval(pred_dir, truth_dir, report_path, eval_text, eval_options);
        }
        if (serve->parsed()) {
            service_options.watch_folder = watch_folder;
            service_options.save_folder = save_folder;
            service_options.cutoff = cutoff;
            service_options.ransac = ransac;
            ccd::service::MeasureService service(service_options);
            service.start_ticker();
            httplib::Server server;
            ccd::service::register_routes(server, service);
            g_server = &server;
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            std::printf("listening on %s:%d\n", host.c_str(), port);
            std::fflush(stdout);
            if (!server.listen(host, port)) {
                std::cerr << "cannot listen on " << host << ':' << port << '\n';
                return kExitIoError;
            }
            return kExitOk;
        }
    } catch (const ccd::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIoError;
    }
    return kExitOk;
}
