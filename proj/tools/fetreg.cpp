// fetreg: direct registration, mosaicking and drift evaluation for
// fetoscopic vessel probability maps and intensity frames.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fetreg/drift.hpp"
#include "fetreg/error.hpp"
#include "fetreg/image_io.hpp"
#include "fetreg/metrics.hpp"
#include "fetreg/mosaic.hpp"
#include "fetreg/registration.hpp"
#include "fetreg/synth.hpp"
#include "fetreg/transform_io.hpp"
#include "fetreg/warp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct GlobalOpts {
    std::string config_path;
    int threads = 1;
    std::optional<std::uint64_t> seed;
    json config;  // parsed --config contents (empty object when absent)
};

[[noreturn]] void usage_error(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    std::exit(kExitUsage);
}

/// Numeric-aware frame ordering: files sort by the value of the last digit
/// run in their stem, ties broken by the full name.
std::vector<fs::path> list_frames(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        usage_error("input directory does not exist: " + dir.string());
    }
    std::vector<std::pair<std::pair<long long, std::string>, fs::path>> keyed;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        for (char& c : ext) c = static_cast<char>(std::tolower(c));
        if (ext != ".pgm" && ext != ".png") continue;
        const std::string stem = entry.path().stem().string();
        long long value = -1;
        for (std::size_t i = stem.size(); i-- > 0;) {
            if (std::isdigit(static_cast<unsigned char>(stem[i]))) {
                std::size_t end = i + 1;
                while (i > 0 && std::isdigit(static_cast<unsigned char>(stem[i - 1]))) --i;
                try {
                    value = std::stoll(stem.substr(i, end - i));
                } catch (const std::exception&) {
                    value = -1;
                }
                break;
            }
        }
        keyed.push_back({{value, entry.path().filename().string()}, entry.path()});
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<fs::path> out;
    out.reserve(keyed.size());
    for (auto& [key, path] : keyed) out.push_back(std::move(path));
    return out;
}

std::vector<fetreg::ScalarImage> load_frames(const std::vector<fs::path>& paths) {
    std::vector<fetreg::ScalarImage> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(fetreg::load_image(p));
    return out;
}

/// Visibility-mask source: explicit file, explicit circle, or the default
/// inscribed circle with a margin.
struct MaskOpts {
    std::string mask_path;
    double fov_margin = 0.02;
    std::vector<double> fov_circle;  // cx cy r when given

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--mask", mask_path, "visibility mask image (nonzero = valid)");
        cmd->add_option("--fov-margin", fov_margin,
                        "inscribed-circle margin fraction for the default mask");
        cmd->add_option("--fov-circle", fov_circle, "explicit circle: cx cy r")->expected(3);
    }

    fetreg::BinaryMask resolve(int width, int height) const {
        if (!mask_path.empty()) {
            const fetreg::ScalarImage m = fetreg::load_image(mask_path);
            if (m.width() != width || m.height() != height) {
                usage_error("mask dimensions do not match the frames");
            }
            return fetreg::binarize(m, 0.5);
        }
        if (!fov_circle.empty()) {
            return fetreg::circular_mask(width, height, fov_circle[0], fov_circle[1],
                                         fov_circle[2]);
        }
        return fetreg::default_fov_mask(width, height, fov_margin);
    }
};

void apply_config(const json& cfg, fetreg::RegistrationOptions& opts) {
    if (cfg.contains("pyramid_levels")) opts.pyramid_levels = cfg["pyramid_levels"].get<int>();
    if (cfg.contains("scale_factor")) opts.scale_factor = cfg["scale_factor"].get<double>();
    if (cfg.contains("max_iterations_per_level")) {
        opts.max_iterations_per_level = cfg["max_iterations_per_level"].get<int>();
    }
    if (cfg.contains("param_tolerance")) opts.param_tolerance = cfg["param_tolerance"].get<double>();
    if (cfg.contains("lm_lambda_init")) opts.lm_lambda_init = cfg["lm_lambda_init"].get<double>();
    if (cfg.contains("lm_lambda_up")) opts.lm_lambda_up = cfg["lm_lambda_up"].get<double>();
    if (cfg.contains("lm_lambda_down")) opts.lm_lambda_down = cfg["lm_lambda_down"].get<double>();
    if (cfg.contains("robust_threshold")) {
        opts.robust_threshold = cfg["robust_threshold"].get<double>();
    }
    if (cfg.contains("bidirectional")) opts.bidirectional = cfg["bidirectional"].get<bool>();
}

void add_registration_flags(CLI::App* cmd, fetreg::RegistrationOptions& opts) {
    cmd->add_option("--pyramid-levels,--pyramid_levels", opts.pyramid_levels,
                    "pyramid levels (default 4)");
    cmd->add_option("--scale-factor,--scale_factor", opts.scale_factor,
                    "pyramid scale factor in (0,1)");
    cmd->add_option("--max-iterations,--max_iterations_per_level", opts.max_iterations_per_level,
                    "LM iterations per level");
    cmd->add_option("--param-tolerance,--param_tolerance", opts.param_tolerance,
                    "LM step-norm stopping tolerance");
    cmd->add_option("--lambda-init,--lm_lambda_init", opts.lm_lambda_init, "initial LM damping");
    cmd->add_option("--lambda-up,--lm_lambda_up", opts.lm_lambda_up, "damping raise factor");
    cmd->add_option("--lambda-down,--lm_lambda_down", opts.lm_lambda_down,
                    "damping lower factor");
    cmd->add_option("--robust-threshold,--robust_threshold", opts.robust_threshold,
                    "Huber threshold in intensity units");
    cmd->add_flag("--bidirectional,!--no-bidirectional", opts.bidirectional,
                  "use the bidirectional photometric cost (default on)");
}

struct PairDiagnostics {
    int pair = 0;
    fetreg::RegistrationResult result;
    std::string error;
};

json diagnostics_json(const std::vector<PairDiagnostics>& diags) {
    json arr = json::array();
    for (const auto& d : diags) {
        json j{{"pair", d.pair},
               {"final_cost", d.result.final_cost},
               {"iterations_per_level", d.result.iterations_per_level},
               {"converged", d.result.converged},
               {"valid_pixel_fraction", d.result.valid_pixel_fraction},
               {"transform", fetreg::to_json(d.result.transform)}};
        if (!d.error.empty()) j["error"] = d.error;
        arr.push_back(std::move(j));
    }
    return arr;
}

/// Sequentially register consecutive pairs; failed pairs fall back to the
/// identity transform and are reported, not fatal.
std::pair<std::vector<fetreg::AffineTransform>, std::vector<PairDiagnostics>> register_sequence(
    const std::vector<fetreg::ScalarImage>& frames, const fetreg::BinaryMask& mask,
    const fetreg::RegistrationOptions& opts, bool init_previous) {
    std::vector<fetreg::AffineTransform> transforms;
    std::vector<PairDiagnostics> diags;
    fetreg::AffineTransform init = fetreg::AffineTransform::identity();
    for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
        PairDiagnostics d;
        d.pair = static_cast<int>(k);
        try {
            d.result = fetreg::register_pair(frames[k], mask, frames[k + 1], mask, init, opts);
        } catch (const fetreg::Error& e) {
            d.result = fetreg::RegistrationResult{};
            d.result.converged = false;
            d.error = e.what();
        }
        transforms.push_back(d.result.transform);
        init = init_previous && d.result.converged ? d.result.transform
                                                   : fetreg::AffineTransform::identity();
        diags.push_back(std::move(d));
    }
    return {std::move(transforms), std::move(diags)};
}

void write_drift_records_csv(const fetreg::DriftReport& report, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw fetreg::IoError("cannot write '" + path.string() + "'");
    out << "window_start,offset,ssim,ssim_maps,iou,valid_fraction\n";
    out.precision(12);
    for (const auto& r : report.per_window) {
        out << r.window_start << ',' << r.offset << ',';
        if (r.ssim) out << *r.ssim;
        out << ',';
        if (r.ssim_maps) out << *r.ssim_maps;
        out << ',';
        if (r.iou) out << *r.iou;
        out << ',' << r.valid_fraction << '\n';
    }
}

fetreg::DriftReport read_drift_records_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw fetreg::IoError("cannot read '" + path.string() + "'");
    fetreg::DriftReport report;
    report.window_size = 2;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("window_start", 0) == 0) continue;
        }
        std::istringstream row(line);
        std::string field;
        fetreg::DriftRecord rec;
        int col = 0;
        try {
            while (std::getline(row, field, ',')) {
                while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) {
                    field.pop_back();
                }
                switch (col) {
                    case 0: rec.window_start = std::stoi(field); break;
                    case 1: rec.offset = std::stoi(field); break;
                    case 2: if (!field.empty()) rec.ssim = std::stod(field); break;
                    case 3: if (!field.empty()) rec.ssim_maps = std::stod(field); break;
                    case 4: if (!field.empty()) rec.iou = std::stod(field); break;
                    case 5: rec.valid_fraction = std::stod(field); break;
                    default: break;
                }
                ++col;
            }
        } catch (const std::exception&) {
            col = -1;
        }
        if (col < 6) throw fetreg::IoError("'" + path.string() + "': malformed drift record");
        report.window_size = std::max(report.window_size, rec.offset + 1);
        report.per_window.push_back(rec);
    }
    return report;
}

void write_summary_csv(const fetreg::DriftSummary& summary, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw fetreg::IoError("cannot write '" + path.string() + "'");
    out << "metric,offset,n,min,q1,median,q3,max\n";
    out.precision(12);
    auto dump = [&out](const char* name, const std::vector<fetreg::OffsetSummary>& rows) {
        for (const auto& s : rows) {
            out << name << ',' << s.offset << ',' << s.n << ',' << s.min << ',' << s.q1 << ','
                << s.median << ',' << s.q3 << ',' << s.max << '\n';
        }
    };
    dump("ssim", summary.ssim);
    dump("ssim_maps", summary.ssim_maps);
    dump("iou", summary.iou);
}

fetreg::ScalarImage mask_to_image(const fetreg::BinaryMask& mask) {
    fetreg::ScalarImage img(mask.width(), mask.height(), 0.0);
    for (std::size_t i = 0; i < mask.data().size(); ++i) {
        img.data()[i] = mask.data()[i] ? 1.0 : 0.0;
    }
    return img;
}

std::string pad_index(int k) {
    std::string s = std::to_string(k);
    return std::string(6 - std::min<std::size_t>(6, s.size()), '0') + s;
}

// ---------------------------------------------------------------- synth ----

int cmd_synth(const GlobalOpts& g, const std::string& out_dir, fetreg::SynthConfig cfg) {
    if (g.seed) cfg.seed = *g.seed;
    cfg.validate();
    const fs::path dir(out_dir);
    fs::create_directories(dir / "frames");
    fs::create_directories(dir / "probmaps");

    const fetreg::SynthSequence seq = fetreg::generate_sequence(cfg);
    for (std::size_t k = 0; k < seq.frames.size(); ++k) {
        fetreg::save_image(seq.frames[k], dir / "frames" / (pad_index(static_cast<int>(k)) + ".pgm"));
        fetreg::save_image(seq.prob_maps[k],
                           dir / "probmaps" / (pad_index(static_cast<int>(k)) + ".pgm"));
    }
    fetreg::save_image(mask_to_image(seq.visibility), dir / "mask.pgm", 8);
    fetreg::save_transforms_csv(seq.gt_pairwise, dir / "gt_transforms.csv");

    json resolved{{"seed", cfg.seed},
                  {"canvas", cfg.canvas},
                  {"frame", cfg.frame},
                  {"n_frames", cfg.n_frames},
                  {"n_vessels", cfg.n_vessels},
                  {"vessel_width_min", cfg.vessel_width_min},
                  {"vessel_width_max", cfg.vessel_width_max},
                  {"noise_sigma", cfg.noise_sigma},
                  {"occluder_rate", cfg.occluder_rate},
                  {"trajectory",
                   {{"translation_px_per_frame", cfg.trajectory.translation_px_per_frame},
                    {"rotation_deg_per_frame", cfg.trajectory.rotation_deg_per_frame},
                    {"scale_per_frame", cfg.trajectory.scale_per_frame},
                    {"heading_wiggle", cfg.trajectory.heading_wiggle}}}};
    std::ofstream(dir / "config.json") << resolved.dump(2) << "\n";
    std::cout << "wrote " << seq.frames.size() << " frames to " << dir << "\n";
    return 0;
}

// ------------------------------------------------------------- register ----

int cmd_register(const GlobalOpts&, const std::string& input_dir, const std::string& out_dir,
                 const fetreg::RegistrationOptions& opts, const MaskOpts& mask_opts,
                 const std::string& t_init_mode, double max_fail_fraction) {
    const auto paths = list_frames(input_dir);
    if (paths.size() < 2) usage_error("need at least 2 frames in " + input_dir);
    const auto frames = load_frames(paths);
    for (const auto& f : frames) {
        if (f.width() != frames[0].width() || f.height() != frames[0].height()) {
            usage_error("frames have mixed dimensions");
        }
    }
    const fetreg::BinaryMask mask = mask_opts.resolve(frames[0].width(), frames[0].height());

    auto [transforms, diags] =
        register_sequence(frames, mask, opts, t_init_mode != "identity");

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    fetreg::save_transforms_csv(transforms, dir / "transforms.csv");
    std::ofstream(dir / "diagnostics.json") << diagnostics_json(diags).dump(2) << "\n";

    std::size_t failed = 0;
    for (const auto& d : diags) failed += d.result.converged ? 0 : 1;
    const double fail_fraction = static_cast<double>(failed) / static_cast<double>(diags.size());
    std::cout << diags.size() << " pairs, " << failed << " failed ("
              << fail_fraction * 100.0 << "%)\n";
    return fail_fraction > max_fail_fraction ? kExitFailure : 0;
}

// --------------------------------------------------------------- mosaic ----

int cmd_mosaic(const GlobalOpts&, const std::string& frames_dir, const std::string& transforms_csv,
               bool register_inline, const std::string& output,
               const fetreg::RegistrationOptions& opts, const MaskOpts& mask_opts,
               const std::string& reference, bool annotate, int max_canvas) {
    if (register_inline && !transforms_csv.empty()) {
        usage_error("--transforms and --register are mutually exclusive");
    }
    if (!register_inline && transforms_csv.empty()) {
        usage_error("either --transforms <csv> or --register is required");
    }
    const auto paths = list_frames(frames_dir);
    if (paths.empty()) usage_error("no frames found in " + frames_dir);
    const auto frames = load_frames(paths);
    const fetreg::BinaryMask mask = mask_opts.resolve(frames[0].width(), frames[0].height());

    std::vector<fetreg::AffineTransform> pairwise;
    if (register_inline) {
        pairwise = register_sequence(frames, mask, opts, true).first;
    } else {
        pairwise = fetreg::load_transforms_csv(transforms_csv);
    }
    if (pairwise.size() + 1 != frames.size()) {
        usage_error("expected " + std::to_string(frames.size() - 1) + " transforms, got " +
                    std::to_string(pairwise.size()));
    }

    const int ref = reference == "first" ? 0 : static_cast<int>(frames.size()) / 2;
    const fetreg::TransformChain chain = fetreg::chain_transforms(pairwise, ref);
    const std::vector<fetreg::BinaryMask> masks(frames.size(), mask);
    const fetreg::Mosaic mosaic = fetreg::blend(frames, masks, chain, max_canvas);
    fetreg::render(mosaic, output, annotate);
    std::cout << "mosaic " << mosaic.width << "x" << mosaic.height << " -> " << output << "\n";
    return 0;
}

// ---------------------------------------------------------------- drift ----

int cmd_drift(const GlobalOpts& g, const std::string& frames_dir, const std::string& probmaps_dir,
              const std::string& transforms_csv, const std::string& out_dir, int window,
              double threshold, const MaskOpts& mask_opts, int ssim_window) {
    const auto frame_paths = list_frames(frames_dir);
    const auto map_paths = list_frames(probmaps_dir);
    if (frame_paths.size() != map_paths.size()) {
        usage_error("frames and probability maps counts differ");
    }
    if (frame_paths.empty()) usage_error("no frames found in " + frames_dir);
    const auto frames = load_frames(frame_paths);
    const auto maps = load_frames(map_paths);
    const auto pairwise = fetreg::load_transforms_csv(transforms_csv);
    const fetreg::BinaryMask mask = mask_opts.resolve(frames[0].width(), frames[0].height());

    fetreg::SsimParams sp;
    sp.window = ssim_window;
    const fetreg::DriftReport report =
        fetreg::evaluate_drift(frames, maps, mask, pairwise, window, threshold, sp, g.threads);

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    write_drift_records_csv(report, dir / "drift_records.csv");
    write_summary_csv(fetreg::summarize(report), dir / "drift_summary.csv");
    std::cout << report.per_window.size() << " records over "
              << report.per_window.size() / std::max(1, window - 1) << " windows -> " << dir
              << "\n";
    return 0;
}

// -------------------------------------------------------------- compare ----

int cmd_compare(const std::string& vessel_csv, const std::string& intensity_csv,
                const std::string& output) {
    const fetreg::DriftReport a = read_drift_records_csv(vessel_csv);
    const fetreg::DriftReport b = read_drift_records_csv(intensity_csv);
    if (a.window_size != b.window_size || a.per_window.size() != b.per_window.size()) {
        std::cerr << "error: drift runs do not cover the same sequence (window counts differ)\n";
        return kExitFailure;
    }
    for (std::size_t i = 0; i < a.per_window.size(); ++i) {
        if (a.per_window[i].window_start != b.per_window[i].window_start ||
            a.per_window[i].offset != b.per_window[i].offset) {
            std::cerr << "error: drift runs do not cover the same windows\n";
            return kExitFailure;
        }
    }
    const fetreg::DriftSummary sa = fetreg::summarize(a);
    const fetreg::DriftSummary sb = fetreg::summarize(b);

    std::ofstream out(output, std::ios::trunc);
    if (!out) {
        std::cerr << "error: cannot write " << output << "\n";
        return kExitFailure;
    }
    out << "metric,offset,vessel_median,intensity_median,delta\n";
    out.precision(12);
    auto dump = [&out](const char* name, const std::vector<fetreg::OffsetSummary>& va,
                       const std::vector<fetreg::OffsetSummary>& vb) {
        for (std::size_t i = 0; i < va.size() && i < vb.size(); ++i) {
            out << name << ',' << va[i].offset << ',' << va[i].median << ',' << vb[i].median
                << ',' << va[i].median - vb[i].median << '\n';
        }
    };
    dump("ssim", sa.ssim, sb.ssim);
    dump("ssim_maps", sa.ssim_maps, sb.ssim_maps);
    dump("iou", sa.iou, sb.iou);
    std::cout << "comparison written to " << output << "\n";
    return 0;
}

// ----------------------------------------------------------- segmetrics ----

int cmd_segmetrics(const std::string& pred_dir, const std::string& gt_dir, double threshold,
                   const std::string& output) {
    const auto pred_paths = list_frames(pred_dir);
    const auto gt_paths = list_frames(gt_dir);
    if (pred_paths.size() != gt_paths.size() || pred_paths.empty()) {
        usage_error("prediction and ground-truth directories must hold the same number of images");
    }
    std::vector<double> dices, ious;
    std::ofstream out(output, std::ios::trunc);
    if (!out) usage_error("cannot write " + output);
    out << "image,dice,iou\n";
    out.precision(12);
    for (std::size_t i = 0; i < pred_paths.size(); ++i) {
        const auto pred = fetreg::binarize(fetreg::load_image(pred_paths[i]), threshold);
        const auto gt = fetreg::binarize(fetreg::load_image(gt_paths[i]), 0.5);
        const double d = fetreg::dice_score(pred, gt);
        const double j = fetreg::iou_score(pred, gt);
        dices.push_back(d);
        ious.push_back(j);
        out << pred_paths[i].filename().string() << ',' << d << ',' << j << '\n';
    }
    auto mean_std = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
        return std::pair<double, double>{mean, sd};
    };
    const auto [dm, ds] = mean_std(dices);
    const auto [im, is] = mean_std(ious);
    out << "mean," << dm << ',' << im << "\nstd," << ds << ',' << is << "\n";
    std::cout.precision(4);
    std::cout << "Dice " << dm << "+-" << ds << "  IoU " << im << "+-" << is << "\n";
    return 0;
}

// ----------------------------------------------------------------- loss ----

int cmd_loss(const std::string& pred_path, const std::string& gt_path, double delta) {
    const fetreg::ScalarImage pred = fetreg::load_image(pred_path);
    const fetreg::ScalarImage gt = fetreg::load_image(gt_path);
    if (pred.width() != gt.width() || pred.height() != gt.height()) {
        usage_error("prediction and ground truth dimensions differ");
    }
    fetreg::LossInputs in;
    in.p_hat = pred.data();
    in.p.reserve(gt.size());
    for (double v : gt.data()) in.p.push_back(v >= 0.5 ? 1.0 : 0.0);
    in.delta = delta;
    const double bce = fetreg::bce_loss(in);
    const double iou = fetreg::iou_loss(in);
    json j{{"bce", bce}, {"iou", iou}, {"combined", bce + iou}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vessel-map registration, mosaicking and drift evaluation"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON config file; flags override its values");
    app.add_option("--threads", g.threads, "worker threads for window evaluation");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "override the generator seed");

    // Pre-scan for --config so its values become the defaults below.
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        std::string value;
        if (a.rfind("--config=", 0) == 0) value = a.substr(9);
        else if (a == "--config" && i + 1 < argc) value = argv[i + 1];
        if (!value.empty()) {
            std::ifstream in(value);
            if (!in) usage_error("cannot read config file: " + value);
            try {
                in >> g.config;
            } catch (const std::exception& e) {
                usage_error("invalid JSON config: " + std::string(e.what()));
            }
            break;
        }
    }

    fetreg::RegistrationOptions reg_opts;
    apply_config(g.config, reg_opts);
    MaskOpts mask_opts;
    if (g.config.contains("fov_margin")) mask_opts.fov_margin = g.config["fov_margin"].get<double>();
    if (g.config.contains("mask")) mask_opts.mask_path = g.config["mask"].get<std::string>();

    // synth
    fetreg::SynthConfig synth_cfg;
    if (g.config.contains("seed")) synth_cfg.seed = g.config["seed"].get<std::uint64_t>();
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "generate a synthetic sequence with ground truth");
    synth->add_option("-o,--output", synth_out, "output directory")->required();
    synth->add_option("--frames,--n-frames", synth_cfg.n_frames, "number of frames");
    synth->add_option("--frame-size", synth_cfg.frame, "frame side in pixels");
    synth->add_option("--canvas", synth_cfg.canvas, "latent scene side in pixels");
    synth->add_option("--n-vessels", synth_cfg.n_vessels, "number of vessels");
    synth->add_option("--noise-sigma", synth_cfg.noise_sigma, "frame noise sigma");
    synth->add_option("--occluder-rate", synth_cfg.occluder_rate,
                      "per-frame occluder spawn probability");
    synth->add_option("--translation", synth_cfg.trajectory.translation_px_per_frame,
                      "camera speed px/frame");
    synth->add_option("--rotation", synth_cfg.trajectory.rotation_deg_per_frame,
                      "rotation rate deg/frame");
    synth->add_option("--scale-rate", synth_cfg.trajectory.scale_per_frame,
                      "multiplicative zoom rate per frame");
    synth->add_option("--heading", synth_cfg.trajectory.initial_heading_deg,
                      "initial heading in degrees (default: from seed)");
    synth->add_option("--heading-wiggle", synth_cfg.trajectory.heading_wiggle,
                      "heading wander half-amplitude in radians");

    // register
    std::string reg_input, reg_output = ".", t_init_mode = "previous";
    double max_fail_fraction = 0.2;
    auto* reg = app.add_subcommand("register", "register consecutive frames");
    reg->add_option("-i,--input", reg_input, "directory of frames or probability maps")
        ->required();
    reg->add_option("-o,--output", reg_output, "output directory for transforms.csv");
    reg->add_option("--t-init", t_init_mode, "initial transform per pair: previous|identity")
        ->check(CLI::IsMember({"previous", "identity"}));
    reg->add_option("--max-fail-fraction", max_fail_fraction,
                    "exit nonzero when more pairs fail");
    add_registration_flags(reg, reg_opts);
    mask_opts.add_flags(reg);

    // mosaic
    std::string mosaic_frames, mosaic_transforms, mosaic_output, reference = "center";
    bool register_inline = false, annotate = false;
    int max_canvas = 8192;
    auto* mos = app.add_subcommand("mosaic", "blend frames into a mosaic");
    mos->add_option("-i,--frames", mosaic_frames, "directory of frames")->required();
    mos->add_option("--transforms", mosaic_transforms, "pairwise transforms CSV");
    mos->add_flag("--register", register_inline, "compute transforms inline");
    mos->add_option("-o,--output", mosaic_output, "output mosaic PGM path")->required();
    mos->add_option("--reference", reference, "reference frame: first|center")
        ->check(CLI::IsMember({"first", "center"}));
    mos->add_flag("--annotate", annotate, "also write a PNG with first/last frame outlines");
    mos->add_option("--max-canvas", max_canvas, "canvas dimension limit");
    add_registration_flags(mos, reg_opts);
    mask_opts.add_flags(mos);

    // drift
    std::string drift_frames, drift_maps, drift_transforms, drift_out = ".";
    int window = 5, ssim_window = 11;
    double threshold = 0.5;
    if (g.config.contains("window_size")) window = g.config["window_size"].get<int>();
    if (g.config.contains("threshold")) threshold = g.config["threshold"].get<double>();
    auto* drift = app.add_subcommand("drift", "windowed drift quantification");
    drift->add_option("-i,--frames", drift_frames, "directory of intensity frames")->required();
    drift->add_option("-p,--probmaps", drift_maps, "directory of probability maps")->required();
    drift->add_option("-t,--transforms", drift_transforms, "pairwise transforms CSV")->required();
    drift->add_option("-o,--output", drift_out, "output directory");
    drift->add_option("--window", window, "window size W (compare offsets 1..W-1)");
    drift->add_option("--threshold", threshold, "probability binarization threshold");
    drift->add_option("--ssim-window", ssim_window, "SSIM window side");
    mask_opts.add_flags(drift);

    // compare
    std::string cmp_vessel, cmp_intensity, cmp_out;
    auto* cmp = app.add_subcommand("compare", "vessel vs intensity drift comparison");
    cmp->add_option("--vessel", cmp_vessel, "drift_records.csv of the vessel-based run")
        ->required();
    cmp->add_option("--intensity", cmp_intensity, "drift_records.csv of the intensity-based run")
        ->required();
    cmp->add_option("-o,--output", cmp_out, "output CSV")->required();

    // segmetrics
    std::string seg_pred, seg_gt, seg_out = "segmetrics.csv";
    double seg_threshold = 0.5;
    auto* seg = app.add_subcommand("segmetrics", "Dice/IoU against ground-truth masks");
    seg->add_option("-p,--pred", seg_pred, "directory of predicted probability maps")->required();
    seg->add_option("-g,--gt", seg_gt, "directory of ground-truth masks")->required();
    seg->add_option("--threshold", seg_threshold, "prediction binarization threshold");
    seg->add_option("-o,--output", seg_out, "output CSV");

    // loss
    std::string loss_pred, loss_gt;
    double loss_delta = 1e-5;
    auto* loss = app.add_subcommand("loss", "combined BCE + Jaccard loss of a prediction");
    loss->add_option("-p,--pred", loss_pred, "predicted probability map")->required();
    loss->add_option("-g,--gt", loss_gt, "ground-truth mask image")->required();
    loss->add_option("--delta", loss_delta, "IoU smoothing constant");

    CLI11_PARSE(app, argc, argv);
    if (seed_opt->count() > 0) g.seed = seed_value;

    try {
        if (*synth) return cmd_synth(g, synth_out, synth_cfg);
        if (*reg) {
            return cmd_register(g, reg_input, reg_output, reg_opts, mask_opts, t_init_mode,
                                max_fail_fraction);
        }
        if (*mos) {
            return cmd_mosaic(g, mosaic_frames, mosaic_transforms, register_inline, mosaic_output,
                              reg_opts, mask_opts, reference, annotate, max_canvas);
        }
        if (*drift) {
            return cmd_drift(g, drift_frames, drift_maps, drift_transforms, drift_out, window,
                             threshold, mask_opts, ssim_window);
        }
        if (*cmp) return cmd_compare(cmp_vessel, cmp_intensity, cmp_out);
        if (*seg) return cmd_segmetrics(seg_pred, seg_gt, seg_threshold, seg_out);
        if (*loss) return cmd_loss(loss_pred, loss_gt, loss_delta);
    } catch (const fetreg::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const fetreg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return 0;
}
