#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "thermonu/thermonu.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct NoiseOption {
    bool enabled = false;
    thermonu::NoiseSpec spec;
};

// Accepts "gaussian=5,fpn=0.9:1.0" (either part optional).
NoiseOption parse_noise(const std::string& text) {
    NoiseOption opt;
    if (text.empty()) return opt;
    opt.enabled = true;
    opt.spec.fpn_vmin = opt.spec.fpn_vmax = 1.0;  // off unless requested
    opt.spec.gaussian_var = 0.0;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos)
            throw thermonu::DomainError("bad --noise component '" + part + "'");
        const std::string key = part.substr(0, eq);
        const std::string val = part.substr(eq + 1);
        if (key == "gaussian") {
            opt.spec.gaussian_var = std::stod(val);
        } else if (key == "fpn") {
            const auto colon = val.find(':');
            if (colon == std::string::npos)
                throw thermonu::DomainError("--noise fpn wants vmin:vmax, got '" + val + "'");
            opt.spec.fpn_vmin = std::stod(val.substr(0, colon));
            opt.spec.fpn_vmax = std::stod(val.substr(colon + 1));
        } else {
            throw thermonu::DomainError("unknown --noise key '" + key + "'");
        }
    }
    thermonu::validate_noise_spec(opt.spec);
    return opt;
}

std::pair<double, double> parse_range(const std::string& text, const char* what) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw thermonu::DomainError(std::string(what) + " wants lo:hi, got '" + text + "'");
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
}

void warn_ambient(const thermonu::CameraModel& model, double t_amb) {
    if (t_amb < model.t_amb_lo || t_amb > model.t_amb_hi)
        std::cerr << "warning: t_amb " << t_amb << " outside the characterized range ["
                  << model.t_amb_lo << ", " << model.t_amb_hi << "]; extrapolating\n";
}

std::vector<std::string> frame_paths(const std::string& path) {
    std::vector<std::string> out;
    if (fs::is_directory(path)) {
        for (const auto& e : fs::directory_iterator(path))
            if (e.is_regular_file() && e.path().extension() == ".tframe")
                out.push_back(e.path().string());
        std::sort(out.begin(), out.end());
    } else if (fs::is_regular_file(path)) {
        out.push_back(path);
    } else {
        throw thermonu::IoError("no frame or directory at '" + path + "'");
    }
    return out;
}

void emit(bool json_out, const json& report, const std::string& text) {
    if (json_out)
        std::cout << report.dump() << "\n";
    else
        std::cout << text;
}

json r2_json(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

int run(int argc, char** argv) {
    CLI::App app{"thermonu: characterization, simulation and estimation for "
                 "microbolometer thermal cameras"};
    app.require_subcommand(1);
    app.fallthrough();
    bool json_out = false;
    app.add_flag("--json", json_out, "machine-readable JSON report on stdout");

    // characterize
    auto* characterize = app.add_subcommand("characterize", "fit a camera model from a campaign");
    std::string ch_campaign, ch_out;
    thermonu::FitConfig ch_cfg;
    characterize->add_option("--campaign", ch_campaign, "directory of tagged .tframe files")
        ->required();
    characterize->add_option("--out", ch_out, "output model path (.tcam.json)")->required();
    characterize->add_option("--m-gl", ch_cfg.m_gl, "object-temperature polynomial max exponent");
    characterize->add_option("--m-spatial-fine", ch_cfg.m_spatial_fine,
                             "fine spatial fit max exponent");
    characterize->add_option("--m-radial", ch_cfg.m_radial, "radial fit max exponent");
    characterize->add_option("--m-ambient", ch_cfg.m_ambient, "ambient fit max exponent");
    characterize->add_option("--sigma", ch_cfg.smoothing_sigma, "coefficient smoothing sigma, px");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "synthesize a gray-level frame");
    std::string sim_model, sim_tobj, sim_out, sim_noise;
    double sim_tamb = 0.0;
    std::uint64_t sim_seed = 0;
    bool sim_has_seed = false, sim_quantize = false;
    simulate->add_option("--model", sim_model)->required();
    simulate->add_option("--tobj", sim_tobj, "temperature map (.tframe)")->required();
    simulate->add_option("--tamb", sim_tamb, "ambient temperature, degrees C")->required();
    simulate->add_option("--out", sim_out)->required();
    simulate->add_option("--noise", sim_noise, "e.g. gaussian=5,fpn=0.9:1.0");
    simulate->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { sim_seed = s; sim_has_seed = true; },
        "seed for the degradation draws");
    simulate->add_flag("--quantize", sim_quantize, "write 14-bit u16 output");

    // gen-dataset
    auto* gen = app.add_subcommand("gen-dataset", "generate supervised (input, target) pairs");
    std::string gd_model, gd_maps, gd_mode = "train", gd_out, gd_noise, gd_gl, gd_temp;
    std::int64_t gd_count = -1;
    std::uint64_t gd_seed = 0;
    thermonu::AugmentSpec gd_spec;
    gen->add_option("--model", gd_model)->required();
    gen->add_option("--maps", gd_maps, "directory of temperature maps")->required();
    gen->add_option("--mode", gd_mode)->check(CLI::IsMember({"train", "val"}));
    gen->add_option("--count", gd_count, "samples to generate (default: one per map)");
    gen->add_option("--seed", gd_seed)->required();
    gen->add_option("--out", gd_out)->required();
    gen->add_option("--crop-h", gd_spec.crop_h);
    gen->add_option("--crop-w", gd_spec.crop_w);
    gen->add_option("--noise", gd_noise, "e.g. gaussian=5,fpn=0.9:1.0");
    gen->add_option("--gl-bounds", gd_gl, "normalization gray-level bounds lo:hi");
    gen->add_option("--temp-bounds", gd_temp, "normalization temperature bounds lo:hi");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "recover a temperature map from a frame");
    std::string est_model, est_frame, est_out, est_mask, est_method = "invert";
    double est_tamb = 0.0;
    estimate->add_option("--model", est_model)->required();
    estimate->add_option("--frame", est_frame)->required();
    estimate->add_option("--tamb", est_tamb)->required();
    estimate->add_option("--method", est_method)->check(CLI::IsMember({"invert", "linear"}));
    estimate->add_option("--out", est_out)->required();
    estimate->add_option("--mask", est_mask, "write the out-of-range mask here");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "score predictions against ground truth");
    std::string ev_pred, ev_truth, ev_report;
    thermonu::MetricsConfig ev_cfg;
    evaluate->add_option("--pred", ev_pred, "frame or directory")->required();
    evaluate->add_option("--truth", ev_truth, "frame or directory")->required();
    evaluate->add_option("--report", ev_report, "write the JSON report here");
    evaluate->add_option("--peak", ev_cfg.dynamic_range, "dynamic range L for SSIM/PSNR");
    evaluate->add_option("--beta", ev_cfg.beta, "DSSIM weight");
    evaluate->add_option("--gamma", ev_cfg.gamma, "TV weight");

    // selfcal-check
    auto* selfcal = app.add_subcommand(
        "selfcal-check", "synthesize a campaign from a reference model, re-characterize, report");
    Eigen::Index sc_h = 336, sc_w = 256;
    double sc_noise = 0.0;
    int sc_navg = 1;
    std::uint64_t sc_seed = 0;
    std::string sc_out_model;
    selfcal->add_option("--height", sc_h);
    selfcal->add_option("--width", sc_w);
    selfcal->add_option("--noise-var", sc_noise, "sensor noise variance, GL^2");
    selfcal->add_option("--n-avg", sc_navg, "frames averaged per operating point");
    selfcal->add_option("--seed", sc_seed);
    selfcal->add_option("--out-model", sc_out_model, "save the rebuilt model here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (characterize->parsed()) {
        const auto points = thermonu::ingest_campaign(ch_campaign);
        const auto model = thermonu::characterize_camera(points, ch_cfg);
        thermonu::save_model(model, ch_out);
        json rep{{"status", "ok"},
                 {"model", ch_out},
                 {"operating_points", points.size()},
                 {"noise_var_gl2", model.noise_var_gl2},
                 {"t_amb_range", {model.t_amb_lo, model.t_amb_hi}},
                 {"temp_bounds", {model.temp_min, model.temp_max}}};
        emit(json_out, rep,
             "characterized " + std::to_string(points.size()) + " operating points -> " + ch_out +
                 "\n");
    } else if (simulate->parsed()) {
        const auto model = thermonu::load_model(sim_model);
        warn_ambient(model, sim_tamb);
        const auto map_file = thermonu::read_frame(sim_tobj);
        thermonu::GrayFrame frame =
            thermonu::simulate_frame(model, thermonu::TemperatureMap{map_file.values}, sim_tamb);
        const NoiseOption noise = parse_noise(sim_noise);
        if (noise.enabled) {
            if (!sim_has_seed)
                throw thermonu::DomainError("simulate: --noise requires --seed for reproducibility");
            thermonu::NoiseSpec spec = noise.spec;
            spec.seed = sim_seed;
            const thermonu::NormBounds b{model.gl_min, model.gl_max, model.temp_min,
                                         model.temp_max};
            frame.values = thermonu::denormalize_gl(
                thermonu::degrade(thermonu::normalize_gl(frame.values, b), spec,
                                  model.gl_max - model.gl_min),
                b);
        }
        std::int64_t clamped = 0;
        if (sim_quantize) {
            auto q = thermonu::quantize(frame);
            frame = std::move(q.frame);
            clamped = q.clamped;
        }
        thermonu::FrameHeader header;
        header.t_amb = sim_tamb;
        if (sim_has_seed) header.seed = sim_seed;
        thermonu::write_frame(header, frame, sim_out);
        json rep{{"status", "ok"}, {"out", sim_out}, {"quantized", sim_quantize},
                 {"clamped", clamped}};
        emit(json_out, rep, "simulated -> " + sim_out + "\n");
    } else if (gen->parsed()) {
        const auto model = thermonu::load_model(gd_model);
        std::vector<thermonu::TemperatureMap> maps;
        for (const auto& path : frame_paths(gd_maps)) {
            const auto f = thermonu::read_frame(path);
            if (f.header.kind != thermonu::FrameKind::Temperature)
                throw thermonu::DomainError("gen-dataset: '" + path +
                                            "' is not a temperature map");
            maps.push_back(thermonu::TemperatureMap{f.values});
        }
        gd_spec.mode = gd_mode == "val" ? thermonu::DatasetMode::Val : thermonu::DatasetMode::Train;
        thermonu::NormBounds bounds{model.gl_min, model.gl_max, model.temp_min, model.temp_max};
        if (!gd_gl.empty()) std::tie(bounds.i_min, bounds.i_max) = parse_range(gd_gl, "--gl-bounds");
        if (!gd_temp.empty())
            std::tie(bounds.t_min, bounds.t_max) = parse_range(gd_temp, "--temp-bounds");
        const NoiseOption noise = parse_noise(gd_noise.empty() ? std::string("gaussian=") +
                                                                     std::to_string(
                                                                         model.noise_var_gl2) +
                                                                     ",fpn=0.9:1.0"
                                                               : gd_noise);
        const std::int64_t count = gd_count > 0 ? gd_count : static_cast<std::int64_t>(maps.size());
        const auto manifest = thermonu::generate_dataset(model, maps, gd_spec, noise.spec, bounds,
                                                         gd_out, count, gd_seed);
        json rep{{"status", "ok"},
                 {"out", gd_out},
                 {"split", manifest.split},
                 {"samples", manifest.samples.size()}};
        emit(json_out, rep,
             "generated " + std::to_string(manifest.samples.size()) + " samples -> " + gd_out +
                 "\n");
    } else if (estimate->parsed()) {
        const auto model = thermonu::load_model(est_model);
        warn_ambient(model, est_tamb);
        const auto frame_file = thermonu::read_frame(est_frame);
        const thermonu::GrayFrame frame{frame_file.values,
                                        frame_file.header.dtype == thermonu::FrameDtype::U16};
        thermonu::MaskedTemperature result;
        if (est_method == "linear") {
            // The linear gain/offset calibration is fitted to a small grid of
            // operating points synthesized from the model.
            std::vector<double> ambients, objects;
            const int n_amb = std::max(model.degrees.m_ambient + 1, 5);
            for (int i = 0; i < n_amb; ++i)
                ambients.push_back(model.t_amb_lo +
                                   (model.t_amb_hi - model.t_amb_lo) * i / (n_amb - 1.0));
            for (int i = 0; i < 9; ++i)
                objects.push_back(model.temp_min + (model.temp_max - model.temp_min) * i / 8.0);
            const auto points = thermonu::synthesize_campaign(model, ambients, objects);
            const auto cal = thermonu::fit_linear_gd(points, model.degrees.m_ambient);
            result = thermonu::estimate_linear(cal, frame, est_tamb);
        } else {
            result = thermonu::invert_polynomial(model, frame, est_tamb);
        }
        thermonu::FrameHeader header;
        header.t_amb = est_tamb;
        thermonu::write_frame(header, result.map, est_out);
        if (!est_mask.empty()) {
            thermonu::FrameHeader mh;
            mh.dtype = thermonu::FrameDtype::U16;
            mh.kind = thermonu::FrameKind::GrayLevel;
            mh.height = result.mask.rows();
            mh.width = result.mask.cols();
            thermonu::write_frame(mh, result.mask.cast<double>(), est_mask);
        }
        json rep{{"status", "ok"},
                 {"out", est_out},
                 {"method", est_method},
                 {"masked_pixels", result.masked_count}};
        emit(json_out, rep,
             "estimated -> " + est_out + " (" + std::to_string(result.masked_count) +
                 " masked pixels)\n");
    } else if (evaluate->parsed()) {
        const auto preds = frame_paths(ev_pred);
        const auto truths = frame_paths(ev_truth);
        if (preds.size() != truths.size())
            throw thermonu::DomainError("evaluate: " + std::to_string(preds.size()) +
                                        " predictions vs " + std::to_string(truths.size()) +
                                        " truth frames");
        json rows = json::array();
        double sum_mae = 0, sum_psnr = 0, sum_ssim = 0, sum_loss = 0;
        std::size_t finite_psnr = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const auto p = thermonu::read_frame(preds[i]);
            const auto t = thermonu::read_frame(truths[i]);
            const double m = thermonu::mae(p.values, t.values);
            const double s = thermonu::ssim(p.values, t.values, ev_cfg);
            const double d = (1.0 - s) / 2.0;
            const double tvv = thermonu::tv(p.values);
            const double pn = thermonu::psnr(p.values, t.values, ev_cfg.dynamic_range);
            const double loss = m + ev_cfg.beta * d + ev_cfg.gamma * tvv;
            rows.push_back({{"pred", preds[i]},
                            {"truth", truths[i]},
                            {"mae", m},
                            {"psnr", r2_json(pn)},
                            {"ssim", s},
                            {"dssim", d},
                            {"tv", tvv},
                            {"loss", loss}});
            sum_mae += m;
            sum_ssim += s;
            sum_loss += loss;
            if (std::isfinite(pn)) {
                sum_psnr += pn;
                ++finite_psnr;
            }
        }
        const double n = static_cast<double>(preds.size());
        json rep{{"status", "ok"},
                 {"frames", rows},
                 {"peak", ev_cfg.dynamic_range},
                 {"aggregate",
                  {{"mae", sum_mae / n},
                   {"psnr", finite_psnr ? json(sum_psnr / finite_psnr) : json("inf")},
                   {"ssim", sum_ssim / n},
                   {"loss", sum_loss / n},
                   {"count", preds.size()}}}};
        if (!ev_report.empty()) {
            std::ofstream out(ev_report, std::ios::binary);
            if (!out) throw thermonu::IoError("evaluate: cannot open '" + ev_report + "'");
            out << rep.dump(1) << "\n";
        }
        char line[160];
        std::snprintf(line, sizeof(line), "frames %zu  MAE %.4f  PSNR %.2f  SSIM %.4f\n",
                      preds.size(), sum_mae / n,
                      finite_psnr ? sum_psnr / finite_psnr : std::numeric_limits<double>::infinity(),
                      sum_ssim / n);
        emit(json_out, rep, line);
    } else if (selfcal->parsed()) {
        const auto reference = thermonu::make_reference_model(sc_h, sc_w);
        const auto report =
            thermonu::selfcal_check(reference, thermonu::default_ambient_set(),
                                    thermonu::default_object_set(), sc_noise, sc_navg,
                                    thermonu::FitConfig{}, sc_seed);
        if (!sc_out_model.empty()) thermonu::save_model(report.rebuilt, sc_out_model);
        json per = json::array();
        for (const auto& s : report.per_point)
            per.push_back({{"t_amb", s.t_amb},
                           {"t_obj", s.t_obj},
                           {"r2", s.r2},
                           {"max_rel_error", s.max_rel_error}});
        json rep{{"status", "ok"},
                 {"min_r2", report.min_r2},
                 {"min_pixel_r2", report.min_pixel_r2},
                 {"max_rel_error", report.max_rel_error},
                 {"roundtrip_mae_c", report.roundtrip_mae},
                 {"noise_var_estimate", report.noise_var_estimate},
                 {"elapsed_seconds", report.elapsed_seconds},
                 {"per_point", per}};
        char line[200];
        std::snprintf(line, sizeof(line),
                      "selfcal %lldx%lld: min R2 %.6f  min pixel R2 %.6f  max rel err %.3e  "
                      "roundtrip MAE %.3e C  (%.1f s)\n",
                      static_cast<long long>(sc_h), static_cast<long long>(sc_w), report.min_r2,
                      report.min_pixel_r2, report.max_rel_error, report.roundtrip_mae,
                      report.elapsed_seconds);
        emit(json_out, rep, line);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const thermonu::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
