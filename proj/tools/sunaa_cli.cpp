// Command-line frontend for batch unmixing runs: simulate a scene, unmix a
// cube against a library, evaluate estimates against ground truth.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sunaa/io.hpp"
#include "sunaa/metrics.hpp"
#include "sunaa/sunaa.hpp"
#include "sunaa/synth.hpp"

namespace fs = std::filesystem;
using namespace sunaa;

namespace {

// Exit codes, fixed so CI can assert specific failures (see README).
enum ExitCode : int {
    kOk = 0,
    kUsage = 2,
    kBadFlagValue = 3,
    kInputMissing = 4,
    kInputMalformed = 5,
    kBandMismatch = 6,
    kRankExceedsLibrary = 7,
    kPixelCountMismatch = 8,
    kWriteFailure = 9,
    kZeroSignal = 10,
    kEvaluateShapeMismatch = 11,
    kInternal = 12,
};

[[noreturn]] void fail(int code, const std::string& message) {
    std::cerr << "error: " << message << "\n";
    std::exit(code);
}

int map_io_error(const IoError& err) {
    switch (err.kind()) {
        case IoError::Kind::FileMissing: return kInputMissing;
        case IoError::Kind::WriteFailure: return kWriteFailure;
        default: return kInputMalformed;
    }
}

std::string format_double(double v, const char* fmt = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

/// Flat key=value manifest, keys sorted, LF line endings.
void write_manifest(const fs::path& path, const std::map<std::string, std::string>& entries) {
    std::string out;
    for (const auto& [key, value] : entries) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(kWriteFailure, "cannot create " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f.flush()) fail(kWriteFailure, "short write to " + path.string());
}

Mat load_matrix(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
        return read_csv_matrix(path);
    }
    return read_smx(path);
}

struct UnmixArgs {
    std::string input, library, out;
    std::size_t endmembers = 0;
    std::size_t iters = 100;
    double tol = 1e-8;
    std::size_t height = 0, width = 0;
    unsigned threads = 0;
    bool blind = false;
};

int run_unmix(const UnmixArgs& args) {
    if (args.endmembers < 1) fail(kBadFlagValue, "--endmembers must be >= 1");
    if (args.iters < 1) fail(kBadFlagValue, "--iters must be >= 1");
    if (!(args.tol >= 0.0)) fail(kBadFlagValue, "--tol must be >= 0");
    if (args.height < 1 || args.width < 1) fail(kBadFlagValue, "--height and --width must be >= 1");
    if (args.blind && !args.library.empty()) {
        fail(kBadFlagValue, "--blind runs without a library; drop --library");
    }
    if (!args.blind && args.library.empty()) {
        fail(kBadFlagValue, "--library is required unless --blind is given");
    }

    Mat cube_mat = load_matrix(args.input);
    if (args.height * args.width != cube_mat.cols()) {
        fail(kPixelCountMismatch,
             "height*width = " + std::to_string(args.height * args.width) + " but cube has " +
                 std::to_string(cube_mat.cols()) + " pixels");
    }
    DataCube cube(std::move(cube_mat), args.height, args.width);

    std::optional<SpectralLibrary> library;
    if (!args.blind) {
        Mat lib_mat = load_matrix(args.library);
        if (lib_mat.rows() != cube.bands()) {
            fail(kBandMismatch, "cube has " + std::to_string(cube.bands()) +
                                    " bands but library has " + std::to_string(lib_mat.rows()));
        }
        library.emplace(std::move(lib_mat));
    }
    const std::size_t m = args.blind ? cube.pixels() : library->count();
    if (args.endmembers > m) {
        fail(kRankExceedsLibrary, "r exceeds m: requested " + std::to_string(args.endmembers) +
                                      " endmembers from " + std::to_string(m) + " library spectra");
    }

    SunaaConfig cfg;
    cfg.rank = args.endmembers;
    cfg.outer_iters = args.iters;
    cfg.rel_obj_tol = args.tol;
    cfg.threads = args.threads;

    const auto t0 = std::chrono::steady_clock::now();
    const FitResult result = args.blind ? fit_blind_aa(cube, cfg) : fit(cube, *library, cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::error_code ec;
    fs::create_directories(args.out, ec);
    const fs::path out_dir(args.out);
    write_smx(out_dir / "A.smx", result.a.mat());
    write_smx(out_dir / "B.smx", result.b.mat());
    write_smx(out_dir / "E.smx", result.e);
    Mat trace(result.objective_trace.size(), 2);
    for (std::size_t t = 0; t < result.objective_trace.size(); ++t) {
        trace(t, 0) = static_cast<double>(t + 1);
        trace(t, 1) = result.objective_trace[t];
    }
    write_csv_matrix(out_dir / "objective_trace.csv", trace, "iteration,objective");
    const auto maps = export_abundance_maps(result.a.mat(), args.height, args.width, out_dir);

    std::map<std::string, std::string> manifest;
    manifest["command"] = "unmix";
    manifest["input"] = args.input;
    manifest["library"] = args.blind ? "(blind)" : args.library;
    manifest["blind"] = args.blind ? "1" : "0";
    manifest["endmembers"] = std::to_string(args.endmembers);
    manifest["iters"] = std::to_string(args.iters);
    manifest["tol"] = format_double(args.tol);
    manifest["height"] = std::to_string(args.height);
    manifest["width"] = std::to_string(args.width);
    manifest["threads"] = std::to_string(args.threads);
    manifest["out"] = args.out;
    manifest["final_objective"] = format_double(result.objective_trace.back());
    manifest["iterations_run"] = std::to_string(result.iterations_run);
    manifest["converged_early"] = result.converged_early ? "1" : "0";
    manifest["uncertified_solves"] = std::to_string(result.uncertified_solves);
    manifest["wall_clock_seconds"] = format_double(seconds, "%.3f");
    manifest["output_a"] = (out_dir / "A.smx").string();
    manifest["output_b"] = (out_dir / "B.smx").string();
    manifest["output_e"] = (out_dir / "E.smx").string();
    manifest["output_trace"] = (out_dir / "objective_trace.csv").string();
    for (std::size_t k = 0; k < maps.size(); ++k) {
        manifest["output_map_" + std::to_string(k + 1)] = maps[k].string();
    }
    write_manifest(out_dir / "manifest.txt", manifest);

    std::cout << "final_objective=" << format_double(result.objective_trace.back())
              << "\niterations_run=" << result.iterations_run << "\n";
    return kOk;
}

struct SimulateArgs {
    std::string library, indices, layout = "grid", out;
    std::size_t height = 0, width = 0;
    std::optional<double> snr;
    std::uint64_t seed = 0;
};

std::vector<std::size_t> parse_indices(const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string tok = text.substr(pos, comma - pos);
        if (tok.empty()) fail(kBadFlagValue, "--indices has an empty entry");
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            fail(kBadFlagValue, "--indices entry '" + tok + "' is not a non-negative integer");
        }
        pos = comma + 1;
        if (comma == text.size()) break;
    }
    return out;
}

int run_simulate(const SimulateArgs& args) {
    if (args.height < 1 || args.width < 1) fail(kBadFlagValue, "--height and --width must be >= 1");
    SceneLayout layout;
    if (args.layout == "grid") {
        layout = SceneLayout::SquareGrid;
    } else if (args.layout == "dirichlet") {
        layout = SceneLayout::Dirichlet;
    } else {
        fail(kBadFlagValue, "--layout must be grid or dirichlet");
    }
    if (args.snr && !std::isfinite(*args.snr)) fail(kBadFlagValue, "--snr must be finite");

    Mat lib_mat = load_matrix(args.library);
    SpectralLibrary library(std::move(lib_mat));

    SceneSpec spec;
    spec.height = args.height;
    spec.width = args.width;
    spec.endmember_indices = parse_indices(args.indices);
    spec.layout = layout;
    spec.seed = args.seed;

    const auto t0 = std::chrono::steady_clock::now();
    GroundTruth truth = [&] {
        try {
            return generate_scene(library, spec);
        } catch (const std::invalid_argument& ex) {
            fail(kBadFlagValue, ex.what());
        }
    }();
    DataCube noisy = [&] {
        if (!args.snr) return truth.cube;
        try {
            return add_noise(truth.cube, *args.snr, args.seed);
        } catch (const std::invalid_argument& ex) {
            fail(kZeroSignal, ex.what());
        }
    }();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::error_code ec;
    fs::create_directories(args.out, ec);
    const fs::path out_dir(args.out);
    write_smx(out_dir / "cube.smx", noisy.mat());
    write_smx(out_dir / "clean.smx", truth.cube.mat());
    write_smx(out_dir / "xtrue.smx", truth.x_true.mat());

    std::map<std::string, std::string> manifest;
    manifest["command"] = "simulate";
    manifest["library"] = args.library;
    manifest["indices"] = args.indices;
    manifest["layout"] = args.layout;
    manifest["height"] = std::to_string(args.height);
    manifest["width"] = std::to_string(args.width);
    manifest["snr_db"] = args.snr ? format_double(*args.snr) : "(none)";
    manifest["seed"] = std::to_string(args.seed);
    manifest["out"] = args.out;
    manifest["wall_clock_seconds"] = format_double(seconds, "%.3f");
    manifest["output_cube"] = (out_dir / "cube.smx").string();
    manifest["output_clean"] = (out_dir / "clean.smx").string();
    manifest["output_xtrue"] = (out_dir / "xtrue.smx").string();
    write_manifest(out_dir / "manifest.txt", manifest);
    return kOk;
}

struct EvaluateArgs {
    std::string truth, estimate, etrue, ehat;
};

int run_evaluate(const EvaluateArgs& args) {
    const Mat x_true = load_matrix(args.truth);
    const Mat x_hat = load_matrix(args.estimate);
    if (x_true.rows() != x_hat.rows() || x_true.cols() != x_hat.cols()) {
        fail(kEvaluateShapeMismatch, "truth is " + std::to_string(x_true.rows()) + "x" +
                                         std::to_string(x_true.cols()) + " but estimate is " +
                                         std::to_string(x_hat.rows()) + "x" +
                                         std::to_string(x_hat.cols()));
    }
    if (args.etrue.empty() != args.ehat.empty()) {
        fail(kBadFlagValue, "--etrue and --ehat must be given together");
    }
    std::string aligned_line;
    if (!args.etrue.empty()) {
        const Mat e_true = load_matrix(args.etrue);
        const Mat e_hat = load_matrix(args.ehat);
        if (e_true.rows() != e_hat.rows() || e_true.cols() != e_hat.cols() ||
            e_true.cols() != x_hat.rows()) {
            fail(kEvaluateShapeMismatch, "endmember matrices do not match the estimate rank");
        }
        const Alignment alignment = align_endmembers(e_true, e_hat);
        aligned_line = "aligned_sre_db=" +
                       format_double(aligned_sre_db(x_true, x_hat, alignment), "%.2f") + "\n";
    }
    // Keys print sorted, matching the manifest convention.
    std::cout << aligned_line << "sre_db=" << format_double(sre_db(x_true, x_hat), "%.2f") << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-supervised spectral unmixing via archetypal analysis"};
    app.require_subcommand(1);

    UnmixArgs unmix_args;
    auto* unmix = app.add_subcommand("unmix", "Unmix a cube against a spectral library");
    unmix->add_option("--input", unmix_args.input, "Cube file (.smx)")->required();
    unmix->add_option("--library", unmix_args.library, "Library file (.smx or .csv)");
    unmix->add_option("--endmembers", unmix_args.endmembers, "Number of scene endmembers")->required();
    unmix->add_option("--iters", unmix_args.iters, "Outer iterations (default 100)");
    unmix->add_option("--tol", unmix_args.tol, "Relative objective tolerance (default 1e-8)");
    unmix->add_option("--height", unmix_args.height, "Image height in pixels")->required();
    unmix->add_option("--width", unmix_args.width, "Image width in pixels")->required();
    unmix->add_option("--out", unmix_args.out, "Output directory")->required();
    unmix->add_option("--threads", unmix_args.threads, "Abundance-step workers (0 = all cores)");
    unmix->add_flag("--blind", unmix_args.blind, "Use the pixels themselves as the dictionary");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic scene");
    simulate->add_option("--library", sim_args.library, "Library file (.smx or .csv)")->required();
    simulate->add_option("--indices", sim_args.indices, "Comma-separated library column indices (0-based)")
        ->required();
    simulate->add_option("--height", sim_args.height, "Image height in pixels")->required();
    simulate->add_option("--width", sim_args.width, "Image width in pixels")->required();
    simulate->add_option("--layout", sim_args.layout, "grid or dirichlet (default grid)");
    simulate->add_option("--snr", sim_args.snr, "Additive-noise SNR in dB (omit for clean)");
    simulate->add_option("--seed", sim_args.seed, "Generator seed (default 0)");
    simulate->add_option("--out", sim_args.out, "Output directory")->required();

    EvaluateArgs eval_args;
    auto* evaluate = app.add_subcommand("evaluate", "Score an estimate against ground truth");
    evaluate->add_option("--truth", eval_args.truth, "Ground-truth abundances (.smx)")->required();
    evaluate->add_option("--estimate", eval_args.estimate, "Estimated abundances (.smx)")->required();
    evaluate->add_option("--etrue", eval_args.etrue, "True endmembers (.smx), enables aligned SRE");
    evaluate->add_option("--ehat", eval_args.ehat, "Estimated endmembers (.smx)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (app.got_subcommand(unmix)) return run_unmix(unmix_args);
        if (app.got_subcommand(simulate)) return run_simulate(sim_args);
        return run_evaluate(eval_args);
    } catch (const IoError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return map_io_error(err);
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kBadFlagValue;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kInternal;
    }
}
