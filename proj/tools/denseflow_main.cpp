// denseflow: classical optical-flow estimation (Lucas-Kanade, Horn-Schunck,
// multiresolution Horn-Schunck) with .flo interchange, color visualization,
// and AAE/EPE evaluation.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "denseflow/dataset.hpp"
#include "denseflow/errors.hpp"
#include "denseflow/flow_io.hpp"
#include "denseflow/horn_schunck.hpp"
#include "denseflow/image_io.hpp"
#include "denseflow/lucas_kanade.hpp"
#include "denseflow/metrics.hpp"
#include "denseflow/multiresolution.hpp"
#include "denseflow/pyramid.hpp"
#include "denseflow/synthetic.hpp"

namespace fs = std::filesystem;
using namespace denseflow;

namespace {

using Scalar = double;

void require_writable_parent(const fs::path& path) {
    const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
    if (!fs::exists(parent)) {
        throw IngestionError("output directory does not exist: " + parent.string());
    }
}

// Expands a flat key=value config file into --key=value tokens, inserted
// right after the subcommand so explicit command-line flags take precedence
// (all options use a take-last policy).
std::vector<std::string> inject_config_tokens(std::vector<std::string> args) {
    if (args.empty()) return args;
    std::string config_path;
    for (size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            break;
        }
    }
    if (config_path.empty()) return args;

    std::ifstream file(config_path);
    if (!file) {
        throw IngestionError("cannot open config file " + config_path);
    }
    std::vector<std::string> tokens;
    std::string line;
    int line_no = 0;
    auto trim = [](std::string s) {
        const auto from = s.find_first_not_of(" \t\r");
        const auto to = s.find_last_not_of(" \t\r");
        return from == std::string::npos ? std::string() : s.substr(from, to - from + 1);
    };
    while (std::getline(file, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ParameterError(config_path + ":" + std::to_string(line_no)
                                 + ": expected key=value");
        }
        tokens.push_back("--" + trim(stripped.substr(0, eq)) + "=" + trim(stripped.substr(eq + 1)));
    }
    args.insert(args.begin() + 1, tokens.begin(), tokens.end());
    return args;
}

std::string format_double(double v, const char* fmt = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

void print_hs_trace(const std::string& label, const HsTrace<Scalar>& trace) {
    std::cout << label << ": iterations=" << trace.iterations_run
              << " converged=" << (trace.converged ? "yes" : "no")
              << " final_delta=" << format_double(trace.final_delta, "%.3e") << "\n";
}

int total_iterations(const MrTrace<Scalar>& trace) {
    int total = 0;
    for (const auto& [level, tr] : trace.per_level) total += tr.iterations_run;
    return total;
}

bool all_levels_converged(const MrTrace<Scalar>& trace) {
    for (const auto& [level, tr] : trace.per_level) {
        if (!tr.converged) return false;
    }
    return true;
}

// ---- estimate ----

struct EstimateConfig {
    std::string frame1, frame2, output, viz;
    std::string method = "hs";
    double alpha = 1.0;
    double epsilon = 1e-8;
    int max_iter = 5000;
    double tol = 1e-5;
    int levels = 4;
    int window_radius = 2;
    double min_eig = 1e-4;
    int stride = 1;
};

int run_estimate(const EstimateConfig& cfg) {
    require_writable_parent(cfg.output);
    if (!cfg.viz.empty()) require_writable_parent(cfg.viz);

    const Image<Scalar> f1 = load_image<Scalar>(cfg.frame1);
    const Image<Scalar> f2 = load_image<Scalar>(cfg.frame2);
    detail::require_same_shape(f1, f2, "frame");

    if (cfg.method == "lk") {
        LkParams<Scalar> params{cfg.window_radius, cfg.min_eig};
        const SparseFlow<Scalar> sparse = lk_solve_grid(f1, f2, cfg.stride, params);
        std::ofstream csv(cfg.output);
        if (!csv) throw IngestionError("cannot open " + cfg.output + " for writing");
        csv << "x,y,u,v,accepted\n";
        size_t accepted = 0;
        for (const auto& p : sparse.points) {
            csv << p.x << "," << p.y << ","
                << format_double(p.u, "%.9g") << "," << format_double(p.v, "%.9g") << ","
                << (p.accepted ? 1 : 0) << "\n";
            accepted += p.accepted ? 1 : 0;
        }
        std::cout << "lk: points=" << sparse.points.size() << " accepted=" << accepted << "\n";
        std::cout << "wrote " << cfg.output << "\n";
        return 0;
    }

    HsParams<Scalar> hs{cfg.alpha, cfg.epsilon, cfg.max_iter, cfg.tol};
    FlowField<Scalar> flow;
    if (cfg.method == "hs") {
        auto [solved, trace] = hs_solve(f1, f2, zero_flow<Scalar>(f1.cols(), f1.rows()), hs);
        flow = std::move(solved);
        print_hs_trace("hs", trace);
    } else {
        MrParams<Scalar> mr{cfg.levels, hs};
        auto [solved, trace] = mrhs_solve(f1, f2, mr);
        flow = std::move(solved);
        for (const auto& [level, tr] : trace.per_level) {
            print_hs_trace("level " + std::to_string(level), tr);
        }
    }
    write_flo_file(cfg.output, flow_cast<float>(flow));
    std::cout << "wrote " << cfg.output << "\n";
    if (!cfg.viz.empty()) {
        const FlowColorImage color = flow_to_color(flow);
        encode_png_rgb8(cfg.viz, color.width, color.height, color.rgb.data());
        std::cout << "wrote " << cfg.viz << "\n";
    }
    return 0;
}

// ---- evaluate ----

struct EvaluateConfig {
    std::string est_path, gt_path, csv_path;
    bool use_mask = true;
    std::string scene;
    int frame = 0;
    std::string method_label;
};

int run_evaluate(const EvaluateConfig& cfg) {
    const FloContents est = read_flo_file(cfg.est_path);
    const FloContents gt = read_flo_file(cfg.gt_path);

    const FlowErrorReport report = evaluate_pair(flow_cast<double>(est.flow),
                                                 flow_cast<double>(gt.flow),
                                                 cfg.use_mask ? &gt.valid : nullptr);
    std::cout << "aae_deg: " << format_double(report.aae_degrees) << "\n"
              << "epe_px: " << format_double(report.epe_pixels) << "\n"
              << "pixels: " << report.pixel_count << "\n"
              << "masked_out: " << report.masked_out << "\n";

    if (!cfg.csv_path.empty()) {
        const bool fresh = !fs::exists(cfg.csv_path);
        std::ofstream csv(cfg.csv_path, std::ios::app);
        if (!csv) throw IngestionError("cannot open " + cfg.csv_path + " for writing");
        if (fresh) csv << "scene,frame,method,aae_deg,epe_px\n";
        csv << cfg.scene << "," << cfg.frame << "," << cfg.method_label << ","
            << format_double(report.aae_degrees) << "," << format_double(report.epe_pixels) << "\n";
    }
    return 0;
}

// ---- visualize ----

int run_visualize(const std::string& input, const std::string& output, double max_magnitude) {
    require_writable_parent(output);
    FloContents contents = read_flo_file(input);
    for (Index y = 0; y < contents.flow.height(); ++y) {
        for (Index x = 0; x < contents.flow.width(); ++x) {
            if (!contents.valid(y, x)) {
                contents.flow.u(y, x) = 0;
                contents.flow.v(y, x) = 0;
            }
        }
    }
    const std::optional<float> norm = max_magnitude > 0
        ? std::optional<float>(static_cast<float>(max_magnitude)) : std::nullopt;
    const FlowColorImage color = flow_to_color(contents.flow, norm);
    encode_png_rgb8(output, color.width, color.height, color.rgb.data());
    std::cout << "wrote " << output << "\n";
    return 0;
}

// ---- pyramid ----

int run_pyramid(const std::string& input, int levels, const std::string& out_dir) {
    const Image<Scalar> image = load_image<Scalar>(input);
    fs::create_directories(out_dir);
    const GaussianPyramid<Scalar> pyramid = build_pyramid(image, levels);
    for (int k = 0; k < pyramid.num_levels(); ++k) {
        const fs::path path = fs::path(out_dir) / ("level_" + std::to_string(k) + ".png");
        save_gray_image(path, pyramid.level(k));
        std::cout << "level " << k << ": " << pyramid.level(k).cols() << "x"
                  << pyramid.level(k).rows() << " -> " << path.string() << "\n";
    }
    std::cout << "levels: " << pyramid.num_levels() << "\n";
    return 0;
}

// ---- synth ----

struct SynthConfig {
    std::string kind = "translation";
    double dx = 1.0, dy = 0.0;
    double angle = 2.0;
    double scale = 1.05;
    int width = 128, height = 128;
    std::uint64_t seed = 7;
    std::string out_dir;
};

int run_synth(const SynthConfig& cfg) {
    SyntheticScene<Scalar> scene;
    if (cfg.kind == "translation") {
        scene = make_translation_scene<Scalar>(cfg.width, cfg.height, cfg.dx, cfg.dy, cfg.seed);
    } else if (cfg.kind == "rotation") {
        scene = make_rotation_scene<Scalar>(cfg.width, cfg.height, cfg.angle, cfg.seed);
    } else if (cfg.kind == "zoom") {
        scene = make_zoom_scene<Scalar>(cfg.width, cfg.height, cfg.scale, cfg.seed);
    } else {
        throw ParameterError("unknown synthetic scene kind: " + cfg.kind);
    }

    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);
    save_gray_image(dir / "frame_0001.png", scene.frame1);
    save_gray_image(dir / "frame_0002.png", scene.frame2);
    write_flo_file(dir / "frame_0001.flo", flow_cast<float>(scene.gt));
    std::cout << "wrote " << (dir / "frame_0001.png").string() << ", "
              << (dir / "frame_0002.png").string() << ", "
              << (dir / "frame_0001.flo").string() << "\n";
    return 0;
}

// ---- benchmark ----

struct BenchmarkConfig {
    std::string dataset;
    std::vector<std::string> scenes = {"alley_1", "bamboo_2", "market_2", "mountain_1"};
    std::vector<int> frames = {1, 28, 41, 35};
    std::vector<int> levels = {4, 4, 3, 4};
    std::vector<std::string> methods = {"hs", "mrhs"};
    double alpha = 1.0;
    double epsilon = 1e-8;
    int max_iter = 5000;
    double tol = 1e-5;
    std::string output;
};

struct BenchmarkRow {
    std::string scene;
    int frame = 0;
    std::string method;
    int levels = 1;
    double aae = 0, epe = 0;
    int iterations = 0;
    bool converged = false;
};

template <typename T>
std::vector<T> broadcast(std::vector<T> values, size_t n, const char* what) {
    if (values.size() == 1) values.resize(n, values[0]);
    if (values.size() != n) {
        throw ParameterError(std::string(what) + " list must have 1 or " + std::to_string(n)
                             + " entries, got " + std::to_string(values.size()));
    }
    return values;
}

int run_benchmark(const BenchmarkConfig& cfg) {
    std::vector<std::string> scenes;
    for (const auto& s : cfg.scenes) {
        if (!s.empty()) scenes.push_back(s);
    }
    if (scenes.empty()) throw ParameterError("scene list is empty");
    if (cfg.methods.empty()) throw ParameterError("method list is empty");
    const auto frames = broadcast(cfg.frames, scenes.size(), "frames");
    const auto levels = broadcast(cfg.levels, scenes.size(), "levels");
    const HsParams<Scalar> hs{cfg.alpha, cfg.epsilon, cfg.max_iter, cfg.tol};

    std::vector<BenchmarkRow> rows;
    std::vector<std::string> failures;
    for (size_t s = 0; s < scenes.size(); ++s) {
        ScenePair<Scalar> scene;
        try {
            scene = load_scene_pair<Scalar>(fs::path(cfg.dataset) / scenes[s], frames[s]);
        } catch (const Error& e) {
            failures.push_back(scenes[s] + " (" + e.what() + ")");
            continue;
        }
        const FlowField<Scalar> gt = flow_cast<Scalar>(scene.gt);
        for (const std::string& method : cfg.methods) {
            BenchmarkRow row;
            row.scene = scenes[s];
            row.frame = frames[s];
            row.method = method;
            FlowField<Scalar> flow;
            if (method == "hs") {
                auto [solved, trace] = hs_solve(scene.frame1, scene.frame2,
                                                zero_flow<Scalar>(scene.frame1.cols(),
                                                                  scene.frame1.rows()), hs);
                flow = std::move(solved);
                row.levels = 1;
                row.iterations = trace.iterations_run;
                row.converged = trace.converged;
            } else if (method == "mrhs") {
                auto [solved, trace] = mrhs_solve(scene.frame1, scene.frame2,
                                                  MrParams<Scalar>{levels[s], hs});
                flow = std::move(solved);
                row.levels = trace.actual_levels;
                row.iterations = total_iterations(trace);
                row.converged = all_levels_converged(trace);
            } else {
                throw ParameterError("unknown benchmark method: " + method);
            }
            row.aae = average_angular_error(flow, gt, &scene.gt_valid);
            row.epe = endpoint_error(flow, gt, &scene.gt_valid);
            rows.push_back(row);
        }
    }

    std::string csv = "scene,frame,method,levels,aae_deg,epe_px,iterations,converged\n";
    for (const auto& r : rows) {
        csv += r.scene + "," + std::to_string(r.frame) + "," + r.method + ","
             + std::to_string(r.levels) + "," + format_double(r.aae) + ","
             + format_double(r.epe) + "," + std::to_string(r.iterations) + ","
             + (r.converged ? "true" : "false") + "\n";
    }
    for (const std::string& method : cfg.methods) {
        double aae = 0, epe = 0;
        int count = 0;
        for (const auto& r : rows) {
            if (r.method != method) continue;
            aae += r.aae;
            epe += r.epe;
            ++count;
        }
        if (count == 0) continue;
        csv += "average,," + method + ",," + format_double(aae / count) + ","
             + format_double(epe / count) + ",,\n";
    }

    std::cout << csv;
    if (!cfg.output.empty()) {
        std::ofstream file(cfg.output);
        if (!file) throw IngestionError("cannot open " + cfg.output + " for writing");
        file << csv;
    }

    if (!failures.empty()) {
        std::string joined;
        for (size_t i = 0; i < failures.size(); ++i) {
            joined += (i > 0 ? "; " : "") + failures[i];
        }
        std::cerr << "error: " << failures.size() << " scene(s) failed: " << joined << "\n";
        return 3;
    }
    return 0;
}

void add_hs_flags(CLI::App* cmd, double& alpha, double& epsilon, int& max_iter, double& tol) {
    cmd->add_option("--alpha", alpha, "Regularization weight")->capture_default_str();
    cmd->add_option("--epsilon", epsilon, "Division guard in the update denominator")
        ->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "Iteration cap per solve")->capture_default_str();
    cmd->add_option("--tol", tol, "Convergence threshold on the L2 flow change")
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"denseflow: Lucas-Kanade and (multiresolution) Horn-Schunck optical flow"};
    app.require_subcommand(1);
    app.failure_message([](const CLI::App*, const CLI::Error& e) {
        return std::string("error: ") + e.what() + "\n";
    });
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    int rc = 0;
    std::string config_file; // consumed by inject_config_tokens before parsing

    EstimateConfig est_cfg;
    auto* est = app.add_subcommand("estimate", "Estimate optical flow between two frames");
    est->add_option("frame1", est_cfg.frame1, "First frame (PNG or PGM)")
        ->required()->check(CLI::ExistingFile);
    est->add_option("frame2", est_cfg.frame2, "Second frame (PNG or PGM)")
        ->required()->check(CLI::ExistingFile);
    est->add_option("-o,--output", est_cfg.output,
                    "Output path (.flo for hs/mrhs, CSV for lk)")->required();
    est->add_option("--method", est_cfg.method, "Solver: lk, hs, or mrhs")
        ->check(CLI::IsMember({"lk", "hs", "mrhs"}))->capture_default_str();
    add_hs_flags(est, est_cfg.alpha, est_cfg.epsilon, est_cfg.max_iter, est_cfg.tol);
    est->add_option("--levels", est_cfg.levels, "Pyramid depth (mrhs)")->capture_default_str();
    est->add_option("--window-radius", est_cfg.window_radius, "LK window radius")
        ->capture_default_str();
    est->add_option("--min-eig", est_cfg.min_eig, "LK acceptance threshold on the structure tensor")
        ->capture_default_str();
    est->add_option("--stride", est_cfg.stride, "LK grid stride in pixels")->capture_default_str();
    est->add_option("--viz", est_cfg.viz, "Also write a color rendering (PNG)");
    est->add_option("--config", config_file, "Read flags from a key=value file (flags override it)");
    est->callback([&] { rc = run_estimate(est_cfg); });

    EvaluateConfig eval_cfg;
    auto* eval = app.add_subcommand("evaluate", "Compare an estimated .flo against ground truth");
    eval->add_option("estimated", eval_cfg.est_path, "Estimated flow (.flo)")
        ->required()->check(CLI::ExistingFile);
    eval->add_option("ground_truth", eval_cfg.gt_path, "Ground-truth flow (.flo)")
        ->required()->check(CLI::ExistingFile);
    eval->add_flag("--mask,!--no-mask", eval_cfg.use_mask,
                   "Exclude unknown-flow pixels of the ground truth")->capture_default_str();
    eval->add_option("--csv", eval_cfg.csv_path, "Append a CSV row to this file");
    eval->add_option("--scene", eval_cfg.scene, "Scene label for the CSV row");
    eval->add_option("--frame", eval_cfg.frame, "Frame index for the CSV row")
        ->capture_default_str();
    eval->add_option("--method-label", eval_cfg.method_label, "Method label for the CSV row");
    eval->callback([&] { rc = run_evaluate(eval_cfg); });

    std::string viz_in, viz_out;
    double viz_max = 0;
    auto* viz = app.add_subcommand("visualize", "Render a .flo file as a color PNG");
    viz->add_option("flow", viz_in, "Flow file (.flo)")->required()->check(CLI::ExistingFile);
    viz->add_option("-o,--output", viz_out, "Output PNG path")->required();
    viz->add_option("--max-magnitude", viz_max,
                    "Magnitude mapped to full saturation (default: 99th percentile)");
    viz->callback([&] { rc = run_visualize(viz_in, viz_out, viz_max); });

    std::string pyr_in, pyr_dir;
    int pyr_levels = 4;
    auto* pyr = app.add_subcommand("pyramid", "Dump the Gaussian pyramid of an image");
    pyr->add_option("input", pyr_in, "Input image (PNG or PGM)")
        ->required()->check(CLI::ExistingFile);
    pyr->add_option("--levels", pyr_levels, "Requested pyramid depth")->capture_default_str();
    pyr->add_option("--out-dir", pyr_dir, "Directory for per-level PNGs")->required();
    pyr->callback([&] { rc = run_pyramid(pyr_in, pyr_levels, pyr_dir); });

    SynthConfig synth_cfg;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic frame pair with ground truth");
    synth->add_option("--kind", synth_cfg.kind, "Scene kind: translation, rotation, or zoom")
        ->check(CLI::IsMember({"translation", "rotation", "zoom"}))->capture_default_str();
    synth->add_option("--dx", synth_cfg.dx, "Horizontal shift in pixels (translation)")
        ->capture_default_str();
    synth->add_option("--dy", synth_cfg.dy, "Vertical shift in pixels (translation)")
        ->capture_default_str();
    synth->add_option("--angle", synth_cfg.angle, "Rotation angle in degrees (rotation)")
        ->capture_default_str();
    synth->add_option("--scale", synth_cfg.scale, "Zoom factor (zoom)")->capture_default_str();
    synth->add_option("--width", synth_cfg.width, "Frame width")->capture_default_str();
    synth->add_option("--height", synth_cfg.height, "Frame height")->capture_default_str();
    synth->add_option("--seed", synth_cfg.seed, "Texture RNG seed")->capture_default_str();
    synth->add_option("--out-dir", synth_cfg.out_dir, "Output directory")->required();
    synth->callback([&] { rc = run_synth(synth_cfg); });

    BenchmarkConfig bench_cfg;
    auto* bench = app.add_subcommand("benchmark",
                                     "Evaluate methods over dataset scenes and emit a CSV table");
    bench->add_option("--dataset", bench_cfg.dataset, "Dataset root: <root>/<scene>/frame_XXXX.{png,flo}")
        ->required();
    bench->add_option("--scenes", bench_cfg.scenes, "Scene directory names")
        ->delimiter(',')->capture_default_str();
    bench->add_option("--frames", bench_cfg.frames, "First frame index per scene")
        ->delimiter(',')->capture_default_str();
    bench->add_option("--levels", bench_cfg.levels, "Pyramid depth per scene (mrhs)")
        ->delimiter(',')->capture_default_str();
    bench->add_option("--methods", bench_cfg.methods, "Methods to run")
        ->delimiter(',')->capture_default_str();
    add_hs_flags(bench, bench_cfg.alpha, bench_cfg.epsilon, bench_cfg.max_iter, bench_cfg.tol);
    bench->add_option("-o,--output", bench_cfg.output, "Also write the CSV table to this file");
    bench->add_option("--config", config_file, "Read flags from a key=value file (flags override it)");
    bench->callback([&] { rc = run_benchmark(bench_cfg); });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = inject_config_tokens(std::move(args));
        std::reverse(args.begin(), args.end()); // CLI11 consumes args back to front
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
