// Command line front end: denoise image files, generate synthetic inputs,
// run parameter sweeps, report bandwidths.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or IO error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kdenoise/kdenoise.hpp"

namespace {

using nlohmann::json;

struct PixelDims {
    int rows = 0;
    int cols = 0;
};

PixelDims parse_pixels(const std::string& s) {
    const auto pos = s.find_first_of("xX");
    if (pos == std::string::npos || pos == 0 || pos + 1 >= s.size())
        throw std::invalid_argument("expected pixel dimensions as MxN, got '" + s + "'");
    PixelDims d;
    try {
        d.rows = std::stoi(s.substr(0, pos));
        d.cols = std::stoi(s.substr(pos + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("expected pixel dimensions as MxN, got '" + s + "'");
    }
    if (d.rows < 1 || d.cols < 1)
        throw std::invalid_argument("pixel dimensions must be positive: '" + s + "'");
    return d;
}

std::pair<double, double> parse_size(const std::string& s) {
    const auto pos = s.find_first_of("xX");
    if (pos == std::string::npos || pos == 0 || pos + 1 >= s.size())
        throw std::invalid_argument("expected physical size as LxW, got '" + s + "'");
    double l = 0, w = 0;
    try {
        l = std::stod(s.substr(0, pos));
        w = std::stod(s.substr(pos + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("expected physical size as LxW, got '" + s + "'");
    }
    if (!(l > 0) || !(w > 0))
        throw std::invalid_argument("physical size must be positive: '" + s + "'");
    return {l, w};
}

kdn::NoiseKind parse_noise_kind(const std::string& s) {
    if (s == "uniform") return kdn::NoiseKind::Uniform;
    if (s == "gaussian") return kdn::NoiseKind::Gaussian;
    throw std::invalid_argument("noise must be 'uniform' or 'gaussian', got '" + s + "'");
}

// Shared denoiser configuration flags, with precedence
// CLI flag > JSON config file > built-in default.
struct ConfigFlags {
    kdn::DenoiseConfig cfg;
    std::string kernel_name = "diffusion";
    std::string solver_name = "direct";
    std::string config_path;

    void attach(CLI::App* cmd) {
        cmd->add_option("--eta2", cfg.eta2, "RKHS kernel bandwidth selector");
        cmd->add_option("--eta3", cfg.eta3, "Markov averaging bandwidth selector");
        cmd->add_option("--eta-g", cfg.eta_g, "data smoothing selector (0 follows eta3)");
        cmd->add_option("--stride", cfg.stride, "subgrid stride");
        cmd->add_option("--theta-factor", cfg.theta_factor, "theta = factor * |K|");
        cmd->add_option("--eps-zero", cfg.eps_zero, "kernel truncation threshold");
        cmd->add_option("--tile", cfg.tile, "patch tile size in pixels");
        cmd->add_option("--overlap", cfg.overlap, "patch overlap in pixels");
        cmd->add_option("--delta1", cfg.delta1, "blending weight bandwidth");
        cmd->add_option("--kernel", kernel_name, "RKHS kernel: diffusion or gaussian");
        cmd->add_option("--solver", solver_name, "solver path: direct or rsvd");
        cmd->add_option("--rank", cfg.solver.rank, "randomized solver rank (0 = full)");
        cmd->add_option("--config", config_path, "JSON config file");
    }

    // Applies JSON values for every option not set explicitly on the line.
    void finalize(CLI::App* cmd) {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw kdn::IoError("cannot open config file " + config_path);
            json j;
            try {
                in >> j;
            } catch (const json::parse_error& e) {
                throw kdn::IoError("bad JSON in " + config_path + ": " + e.what());
            }
            auto take = [&](const char* flag, const char* key, auto& target) {
                if (cmd->count(flag) == 0 && j.contains(key)) j.at(key).get_to(target);
            };
            take("--eta2", "eta2", cfg.eta2);
            take("--eta3", "eta3", cfg.eta3);
            take("--eta-g", "eta_g", cfg.eta_g);
            take("--stride", "stride", cfg.stride);
            take("--theta-factor", "theta_factor", cfg.theta_factor);
            take("--eps-zero", "eps_zero", cfg.eps_zero);
            take("--tile", "tile", cfg.tile);
            take("--overlap", "overlap", cfg.overlap);
            take("--delta1", "delta1", cfg.delta1);
            take("--kernel", "kernel", kernel_name);
            take("--solver", "solver", solver_name);
            take("--rank", "rank", cfg.solver.rank);
        }
        if (kernel_name == "gaussian")
            cfg.kernel = kdn::RkhsKernelKind::Gaussian;
        else if (kernel_name == "diffusion")
            cfg.kernel = kdn::RkhsKernelKind::Diffusion;
        else
            throw std::invalid_argument("kernel must be 'diffusion' or 'gaussian', got '" +
                                        kernel_name + "'");
        if (solver_name == "rsvd")
            cfg.solver.mode = kdn::SolverMode::RandomizedSvd;
        else if (solver_name == "direct")
            cfg.solver.mode = kdn::SolverMode::DenseDirect;
        else
            throw std::invalid_argument("solver must be 'direct' or 'rsvd', got '" +
                                        solver_name + "'");
        cfg.validate();
    }

    json to_json() const {
        return json{{"eta2", cfg.eta2},
                    {"eta3", cfg.eta3},
                    {"eta_g", cfg.eta_g},
                    {"stride", cfg.stride},
                    {"theta_factor", cfg.theta_factor},
                    {"eps_zero", cfg.eps_zero},
                    {"tile", cfg.tile},
                    {"overlap", cfg.overlap},
                    {"delta1", cfg.delta1},
                    {"kernel", kernel_name},
                    {"solver", solver_name},
                    {"rank", cfg.solver.rank}};
    }
};

int run_synth(const std::string& pixels, const std::string& size, double alpha,
              const std::string& out) {
    const PixelDims d = parse_pixels(pixels);
    const auto [l, w] = parse_size(size);
    kdn::write_image(kdn::synth_cosine(d.rows, d.cols, l, w, alpha), out);
    return 0;
}

int run_add_noise(const std::string& in, const std::string& out, const std::string& noise,
                  double sigma, std::uint64_t seed) {
    kdn::NoiseModel model{parse_noise_kind(noise), sigma, seed};
    kdn::write_image(kdn::add_noise(kdn::read_image(in), model), out);
    return 0;
}

int run_denoise(const std::string& in, const std::string& out, const std::string& size,
                ConfigFlags& flags) {
    kdn::GrayscaleImage img = kdn::read_image(in);
    if (!size.empty()) {
        const auto [l, w] = parse_size(size);
        img = kdn::GrayscaleImage(img.rows(), img.cols(), l, w, img.values());
    }

    kdn::ImageDenoiseResult res = kdn::denoise_image_full(img, flags.cfg);
    kdn::write_image(res.denoised, out);

    const kdn::DenoiseDiagnostics& diag = res.diagnostics;
    json sidecar{{"input", in},
                 {"output", out},
                 {"pixels", {img.rows(), img.cols()}},
                 {"theta", diag.theta},
                 {"delta2", diag.delta2},
                 {"delta3", diag.delta3},
                 {"delta_g", diag.delta_g},
                 {"kernel_norm", diag.kernel_norm},
                 {"condition_estimate", diag.condition_estimate},
                 {"patch_grid", {res.patch_grid_rows, res.patch_grid_cols}},
                 {"patch_pixels", diag.n_pixels},
                 {"subgrid_size", diag.subgrid_size},
                 {"rng", kdn::kRngName},
                 {"seconds", {{"build", res.seconds_build}, {"solve", res.seconds_solve}}},
                 {"config", flags.to_json()}};
    std::ofstream side(out + ".json");
    if (!side) throw kdn::IoError("cannot write " + out + ".json");
    side << sidecar.dump(2) << "\n";
    return 0;
}

int run_bandwidth(int eta, const std::string& pixels, const std::string& size,
                  double eps_zero) {
    const PixelDims d = parse_pixels(pixels);
    const auto [l, w] = parse_size(size);
    const double spacing = std::max(l / d.cols, w / d.rows);
    const kdn::BandwidthSelection sel = kdn::make_bandwidth_selection(eta, spacing, eps_zero);
    std::cout << "eta = " << sel.eta << "\n";
    std::cout.precision(17);
    std::cout << "R_lattice = " << sel.lattice_radius << "\n"
              << "R = " << sel.radius << "\n"
              << "delta = " << sel.delta << "\n";
    return 0;
}

struct ExperimentFlags {
    std::string kind = "cosine";
    std::vector<std::string> pixels{"100x100"};
    std::vector<double> alphas{20.0};
    std::vector<double> sigmas{0.1};
    std::vector<int> eta3s{4};
    std::string noise = "gaussian";
    std::uint64_t seed = 1;
    std::string in;
    std::string size = "1x1";
    std::string csv;
    std::string out_dir;
};

int run_experiment(ExperimentFlags& ex, ConfigFlags& flags) {
    if (ex.pixels.empty() || ex.alphas.empty() || ex.sigmas.empty() || ex.eta3s.empty())
        throw std::invalid_argument("experiment sweep lists must be nonempty");
    if (ex.kind != "zero" && ex.kind != "cosine" && ex.kind != "file")
        throw std::invalid_argument("kind must be 'zero', 'cosine' or 'file', got '" + ex.kind +
                                    "'");
    if (ex.kind == "file" && ex.in.empty())
        throw std::invalid_argument("kind 'file' requires --in");

    const auto [l, w] = parse_size(ex.size);
    const kdn::NoiseKind noise_kind = parse_noise_kind(ex.noise);

    // alpha only shapes the cosine image
    const std::vector<double> alphas =
        ex.kind == "cosine" ? ex.alphas : std::vector<double>{0.0};

    std::vector<kdn::MetricRow> rows;
    int trial_index = 0;
    for (const std::string& px : ex.pixels) {
        kdn::GrayscaleImage base(1, 1, 1.0, 1.0);
        PixelDims d{};
        if (ex.kind == "file") {
            base = kdn::read_image(ex.in);
            base = kdn::GrayscaleImage(base.rows(), base.cols(), l, w, base.values());
            d = PixelDims{base.rows(), base.cols()};
        } else {
            d = parse_pixels(px);
        }
        for (double alpha : alphas) {
            kdn::GrayscaleImage clean =
                ex.kind == "cosine" ? kdn::synth_cosine(d.rows, d.cols, l, w, alpha)
                : ex.kind == "zero" ? kdn::GrayscaleImage(d.rows, d.cols, l, w)
                                    : base;
            for (double sigma : ex.sigmas) {
                for (int eta3 : ex.eta3s) {
                    kdn::DenoiseConfig cfg = flags.cfg;
                    cfg.eta3 = eta3;
                    kdn::NoiseModel model{noise_kind, sigma, ex.seed};
                    kdn::TrialResult trial = kdn::run_denoise_trial(clean, model, cfg);
                    for (kdn::MetricRow& r : kdn::trial_rows(ex.kind, trial, model, cfg, alpha))
                        rows.push_back(std::move(r));
                    if (!ex.out_dir.empty()) {
                        namespace fs = std::filesystem;
                        fs::create_directories(ex.out_dir);
                        const std::string stem =
                            ex.out_dir + "/" + ex.kind + "_" + std::to_string(trial_index);
                        kdn::write_image(trial.clean, stem + "_clean.pgm");
                        kdn::write_image(trial.noisy, stem + "_noisy.pgm");
                        kdn::write_image(trial.denoised, stem + "_denoised.pgm");
                    }
                    ++trial_index;
                }
            }
        }
        if (ex.kind == "file") break; // pixel sweep does not apply to files
    }

    if (ex.csv.empty()) {
        kdn::write_metrics_csv(std::cout, rows);
    } else {
        std::ofstream out(ex.csv);
        if (!out) throw kdn::IoError("cannot write " + ex.csv);
        kdn::write_metrics_csv(out, rows);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel conditional-expectation image denoiser"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate the separable-cosine test image");
    std::string synth_pixels = "250x250", synth_size = "1x1", synth_out;
    double synth_alpha = 20.0;
    synth->add_option("--pixels", synth_pixels, "image dimensions MxN");
    synth->add_option("--size", synth_size, "physical size LxW");
    synth->add_option("--alpha", synth_alpha, "cosine frequency");
    synth->add_option("--out", synth_out, "output PGM path")->required();

    // add-noise
    auto* addn = app.add_subcommand("add-noise", "add zero-mean noise to an image");
    std::string an_in, an_out, an_noise = "gaussian";
    double an_sigma = 0.1;
    std::uint64_t an_seed = 1;
    addn->add_option("--in", an_in, "input image")->required();
    addn->add_option("--out", an_out, "output PGM path")->required();
    addn->add_option("--noise", an_noise, "uniform or gaussian");
    addn->add_option("--sigma", an_sigma, "noise scale");
    addn->add_option("--seed", an_seed, "noise seed");

    // denoise
    auto* den = app.add_subcommand("denoise", "denoise an image file");
    std::string den_in, den_out, den_size;
    ConfigFlags den_flags;
    den->add_option("--in", den_in, "input image")->required();
    den->add_option("--out", den_out, "output PGM path")->required();
    den->add_option("--size", den_size, "physical size LxW (default 1x1)");
    den_flags.attach(den);

    // experiment
    auto* exp = app.add_subcommand("experiment", "run sweeps and emit CSV metrics");
    ExperimentFlags ex;
    ConfigFlags exp_flags;
    exp->add_option("--kind", ex.kind, "zero, cosine or file");
    exp->add_option("--pixels", ex.pixels, "pixel dimension sweep (MxN ...)");
    exp->add_option("--alpha", ex.alphas, "cosine frequency sweep");
    exp->add_option("--sigma", ex.sigmas, "noise scale sweep");
    exp->add_option("--eta3-sweep,--eta3-list", ex.eta3s, "eta3 sweep");
    exp->add_option("--noise", ex.noise, "uniform or gaussian");
    exp->add_option("--seed", ex.seed, "noise seed");
    exp->add_option("--in", ex.in, "clean input image for kind 'file'");
    exp->add_option("--size", ex.size, "physical size LxW");
    exp->add_option("--csv", ex.csv, "CSV output path (default stdout)");
    exp->add_option("--out-dir", ex.out_dir, "also dump clean/noisy/denoised images here");
    exp_flags.attach(exp);

    // bandwidth
    auto* bw = app.add_subcommand("bandwidth", "report radius and bandwidth for an eta");
    int bw_eta = 4;
    std::string bw_pixels, bw_size = "1x1";
    double bw_eps = 1e-14;
    bw->add_option("--eta", bw_eta, "neighbor count selector")->required();
    bw->add_option("--pixels", bw_pixels, "image dimensions MxN")->required();
    bw->add_option("--size", bw_size, "physical size LxW");
    bw->add_option("--eps-zero", bw_eps, "kernel truncation threshold");

    try {
        app.parse(argc, argv);
        if (synth->parsed()) return run_synth(synth_pixels, synth_size, synth_alpha, synth_out);
        if (addn->parsed()) return run_add_noise(an_in, an_out, an_noise, an_sigma, an_seed);
        if (den->parsed()) {
            den_flags.finalize(den);
            return run_denoise(den_in, den_out, den_size, den_flags);
        }
        if (exp->parsed()) {
            exp_flags.finalize(exp);
            return run_experiment(ex, exp_flags);
        }
        if (bw->parsed()) return run_bandwidth(bw_eta, bw_pixels, bw_size, bw_eps);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const kdn::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const kdn::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 1;
    }
}
