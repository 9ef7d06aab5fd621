#include "wavefuse/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <thread>

#include "wavefuse/error.hpp"
#include "wavefuse/evaluation.hpp"
#include "wavefuse/image_io.hpp"
#include "wavefuse/pipelines.hpp"

namespace wavefuse {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// ---- enum names ----------------------------------------------------------

Algo parse_algo(const std::string& s) {
    if (s == "pa1")
        return Algo::Pa1;
    if (s == "pa2")
        return Algo::Pa2;
    if (s == "dcp")
        return Algo::Dcp;
    throw UsageError("unknown algorithm '" + s + "' (expected pa1|pa2|dcp)");
}

const char* algo_name(Algo a) {
    switch (a) {
    case Algo::Pa1:
        return "pa1";
    case Algo::Pa2:
        return "pa2";
    default:
        return "dcp";
    }
}

Conductance parse_conductance(const std::string& s) {
    if (s == "rational")
        return Conductance::Rational;
    if (s == "exponential")
        return Conductance::Exponential;
    throw UsageError("unknown conductance '" + s + "' (expected rational|exponential)");
}

XyzChannelMode parse_xyz_mode(const std::string& s) {
    if (s == "y" || s == "y_only")
        return XyzChannelMode::YOnly;
    if (s == "all")
        return XyzChannelMode::All;
    throw UsageError("unknown xyz mode '" + s + "' (expected y|all)");
}

WaveletBasis parse_basis(const std::string& s) {
    if (s == "haar")
        return WaveletBasis::Haar;
    if (s == "db2")
        return WaveletBasis::Db2;
    throw UsageError("unknown wavelet basis '" + s + "' (expected haar|db2)");
}

BaseFusionRule parse_base_rule(const std::string& s) {
    if (s == "mean")
        return BaseFusionRule::Mean;
    if (s == "max")
        return BaseFusionRule::Max;
    throw UsageError("unknown base rule '" + s + "' (expected mean|max)");
}

Pa1Stage2Partner parse_partner(const std::string& s) {
    if (s == "stretched")
        return Pa1Stage2Partner::StretchedGlobal;
    if (s == "original")
        return Pa1Stage2Partner::Original;
    throw UsageError("unknown pa1 partner '" + s + "' (expected stretched|original)");
}

ChromaSource parse_chroma(const std::string& s) {
    if (s == "median")
        return ChromaSource::MedianVariant;
    if (s == "original")
        return ChromaSource::Original;
    throw UsageError("unknown chroma source '" + s + "' (expected median|original)");
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        try {
            std::size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size())
                throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw UsageError(std::string(what) + ": bad number '" + tok + "'");
        }
        if (comma == std::string::npos)
            break;
        pos = comma + 1;
    }
    if (out.empty())
        throw UsageError(std::string(what) + ": empty list");
    return out;
}

// ---- config file / flag handling -----------------------------------------

json config_to_json(const PipelineConfig& c) {
    json j;
    j["algo"] = algo_name(c.algo);
    j["scales"] = c.scales;
    j["alpha"] = c.alpha;
    j["frac_gain"] = c.frac_gain;
    j["frac_taps"] = c.frac_taps;
    j["gammas"] = c.gammas;
    j["kappa"] = c.diffusion.kappa;
    j["lambda"] = c.diffusion.lambda;
    j["diffusion_iterations"] = c.diffusion.iterations;
    j["conductance"] =
        c.diffusion.conductance == Conductance::Rational ? "rational" : "exponential";
    j["nlm"] = c.use_nlm;
    j["nlm_patch_radius"] = c.nlm.patch_radius;
    j["nlm_search_radius"] = c.nlm.search_radius;
    j["nlm_h"] = c.nlm.h;
    j["nlm_sigma"] = c.nlm.sigma;
    j["outer_iterations"] = c.outer_iterations;
    j["gray_world"] = c.gray_world;
    j["stretch"] = c.stretch;
    j["stretch_lo"] = c.stretch_lo;
    j["stretch_hi"] = c.stretch_hi;
    j["xyz_mode"] = c.xyz_mode == XyzChannelMode::YOnly ? "y" : "all";
    j["basis"] = c.basis == WaveletBasis::Haar ? "haar" : "db2";
    j["base_rule"] = c.base_rule == BaseFusionRule::Mean ? "mean" : "max";
    j["pa1_partner"] =
        c.pa1_partner == Pa1Stage2Partner::StretchedGlobal ? "stretched" : "original";
    j["chroma"] = c.chroma == ChromaSource::MedianVariant ? "median" : "original";
    j["dcp_patch"] = c.dcp.patch;
    j["dcp_omega"] = c.dcp.omega;
    j["dcp_t_floor"] = c.dcp.t_floor;
    j["dcp_airlight_fraction"] = c.dcp.airlight_fraction;
    j["dcp_guided_radius"] = c.dcp.guided_radius;
    j["dcp_guided_eps"] = c.dcp.guided_eps;
    return j;
}

void apply_json_key(PipelineConfig& c, const std::string& k, const json& v) {
    try {
        if (k == "algo")
            c.algo = parse_algo(v.get<std::string>());
        else if (k == "scales")
            c.scales = v.get<int>();
        else if (k == "alpha")
            c.alpha = v.get<double>();
        else if (k == "frac_gain")
            c.frac_gain = v.get<double>();
        else if (k == "frac_taps")
            c.frac_taps = v.get<int>();
        else if (k == "gammas")
            c.gammas = v.get<std::vector<double>>();
        else if (k == "kappa")
            c.diffusion.kappa = v.get<double>();
        else if (k == "lambda")
            c.diffusion.lambda = v.get<double>();
        else if (k == "diffusion_iterations")
            c.diffusion.iterations = v.get<int>();
        else if (k == "conductance")
            c.diffusion.conductance = parse_conductance(v.get<std::string>());
        else if (k == "nlm")
            c.use_nlm = v.get<bool>();
        else if (k == "nlm_patch_radius")
            c.nlm.patch_radius = v.get<int>();
        else if (k == "nlm_search_radius")
            c.nlm.search_radius = v.get<int>();
        else if (k == "nlm_h")
            c.nlm.h = v.get<double>();
        else if (k == "nlm_sigma")
            c.nlm.sigma = v.get<double>();
        else if (k == "outer_iterations")
            c.outer_iterations = v.get<int>();
        else if (k == "gray_world")
            c.gray_world = v.get<bool>();
        else if (k == "stretch")
            c.stretch = v.get<bool>();
        else if (k == "stretch_lo")
            c.stretch_lo = v.get<double>();
        else if (k == "stretch_hi")
            c.stretch_hi = v.get<double>();
        else if (k == "xyz_mode")
            c.xyz_mode = parse_xyz_mode(v.get<std::string>());
        else if (k == "basis")
            c.basis = parse_basis(v.get<std::string>());
        else if (k == "base_rule")
            c.base_rule = parse_base_rule(v.get<std::string>());
        else if (k == "pa1_partner")
            c.pa1_partner = parse_partner(v.get<std::string>());
        else if (k == "chroma")
            c.chroma = parse_chroma(v.get<std::string>());
        else if (k == "dcp_patch")
            c.dcp.patch = v.get<int>();
        else if (k == "dcp_omega")
            c.dcp.omega = v.get<double>();
        else if (k == "dcp_t_floor")
            c.dcp.t_floor = v.get<double>();
        else if (k == "dcp_airlight_fraction")
            c.dcp.airlight_fraction = v.get<double>();
        else if (k == "dcp_guided_radius")
            c.dcp.guided_radius = v.get<int>();
        else if (k == "dcp_guided_eps")
            c.dcp.guided_eps = v.get<double>();
        else
            throw UsageError("unknown config key '" + k + "'");
    } catch (const json::exception& e) {
        throw UsageError("config key '" + k + "': " + e.what());
    }
}

struct Overrides {
    std::optional<std::string> config_path;
    std::optional<std::string> algo, gammas, conductance, xyz_mode, basis, base_rule,
        pa1_partner, chroma;
    std::optional<int> scales, frac_taps, outer_iterations, diff_iterations, nlm_patch,
        nlm_search, dcp_patch, dcp_guided_radius;
    std::optional<double> alpha, frac_gain, kappa, lambda, nlm_h, nlm_sigma, stretch_lo,
        stretch_hi, dcp_omega, dcp_t_floor, dcp_airlight_fraction, dcp_guided_eps;
    bool no_color_correct = false;
    bool nlm = false;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "JSON config file (flags override it)");
    cmd->add_option("--algo", o.algo, "algorithm: pa1|pa2|dcp");
    cmd->add_option("--scales", o.scales, "wavelet decomposition levels");
    cmd->add_option("--alpha", o.alpha, "fractional differintegral order");
    cmd->add_option("--frac-gain", o.frac_gain, "fractional detail boost gain");
    cmd->add_option("--frac-taps", o.frac_taps, "fractional mask tap count");
    cmd->add_option("--gammas", o.gammas, "comma-separated exposure gammas");
    cmd->add_option("--iterations", o.outer_iterations, "outer pipeline iterations");
    cmd->add_option("--diffusion-iterations", o.diff_iterations, "diffusion step count");
    cmd->add_option("--kappa", o.kappa, "diffusion edge threshold");
    cmd->add_option("--lambda", o.lambda, "diffusion step size (0, 0.25]");
    cmd->add_option("--conductance", o.conductance, "rational|exponential");
    cmd->add_flag("--no-color-correct", o.no_color_correct,
                  "disable gray-world and percentile stretch");
    cmd->add_flag("--nlm", o.nlm, "apply a final non-local-means polish");
    cmd->add_option("--nlm-patch-radius", o.nlm_patch, "NLM patch radius");
    cmd->add_option("--nlm-search-radius", o.nlm_search, "NLM search radius");
    cmd->add_option("--nlm-h", o.nlm_h, "NLM filtering strength");
    cmd->add_option("--nlm-sigma", o.nlm_sigma, "NLM assumed noise level");
    cmd->add_option("--stretch-lo", o.stretch_lo, "lower stretch percentile");
    cmd->add_option("--stretch-hi", o.stretch_hi, "upper stretch percentile");
    cmd->add_option("--xyz-mode", o.xyz_mode, "wavelet channels: y|all");
    cmd->add_option("--basis", o.basis, "wavelet basis: haar|db2");
    cmd->add_option("--base-rule", o.base_rule, "base fusion rule: mean|max");
    cmd->add_option("--pa1-partner", o.pa1_partner, "stage-2 partner: stretched|original");
    cmd->add_option("--chroma", o.chroma, "chroma carrier: median|original");
    cmd->add_option("--dcp-patch", o.dcp_patch, "dark-channel window radius");
    cmd->add_option("--dcp-omega", o.dcp_omega, "haze retention factor");
    cmd->add_option("--dcp-t-floor", o.dcp_t_floor, "minimum transmission");
    cmd->add_option("--dcp-airlight-fraction", o.dcp_airlight_fraction,
                    "top dark-channel fraction for airlight");
    cmd->add_option("--dcp-guided-radius", o.dcp_guided_radius, "guided filter radius");
    cmd->add_option("--dcp-guided-eps", o.dcp_guided_eps, "guided filter regularizer");
}

PipelineConfig build_config(const Overrides& o) {
    PipelineConfig c;
    if (o.config_path) {
        std::ifstream in(*o.config_path);
        if (!in)
            throw Error(ErrorKind::Io, "cannot open config file: " + *o.config_path);
        json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw UsageError("config file: " + std::string(e.what()));
        }
        if (!j.is_object())
            throw UsageError("config file must hold a JSON object");
        for (auto it = j.begin(); it != j.end(); ++it)
            apply_json_key(c, it.key(), it.value());
    }
    if (o.algo)
        c.algo = parse_algo(*o.algo);
    if (o.scales)
        c.scales = *o.scales;
    if (o.alpha)
        c.alpha = *o.alpha;
    if (o.frac_gain)
        c.frac_gain = *o.frac_gain;
    if (o.frac_taps)
        c.frac_taps = *o.frac_taps;
    if (o.gammas)
        c.gammas = parse_double_list(*o.gammas, "--gammas");
    if (o.outer_iterations)
        c.outer_iterations = *o.outer_iterations;
    if (o.diff_iterations)
        c.diffusion.iterations = *o.diff_iterations;
    if (o.kappa)
        c.diffusion.kappa = *o.kappa;
    if (o.lambda)
        c.diffusion.lambda = *o.lambda;
    if (o.conductance)
        c.diffusion.conductance = parse_conductance(*o.conductance);
    if (o.nlm)
        c.use_nlm = true;
    if (o.nlm_patch)
        c.nlm.patch_radius = *o.nlm_patch;
    if (o.nlm_search)
        c.nlm.search_radius = *o.nlm_search;
    if (o.nlm_h)
        c.nlm.h = *o.nlm_h;
    if (o.nlm_sigma)
        c.nlm.sigma = *o.nlm_sigma;
    if (o.stretch_lo)
        c.stretch_lo = *o.stretch_lo;
    if (o.stretch_hi)
        c.stretch_hi = *o.stretch_hi;
    if (o.xyz_mode)
        c.xyz_mode = parse_xyz_mode(*o.xyz_mode);
    if (o.basis)
        c.basis = parse_basis(*o.basis);
    if (o.base_rule)
        c.base_rule = parse_base_rule(*o.base_rule);
    if (o.pa1_partner)
        c.pa1_partner = parse_partner(*o.pa1_partner);
    if (o.chroma)
        c.chroma = parse_chroma(*o.chroma);
    if (o.dcp_patch)
        c.dcp.patch = *o.dcp_patch;
    if (o.dcp_omega)
        c.dcp.omega = *o.dcp_omega;
    if (o.dcp_t_floor)
        c.dcp.t_floor = *o.dcp_t_floor;
    if (o.dcp_airlight_fraction)
        c.dcp.airlight_fraction = *o.dcp_airlight_fraction;
    if (o.dcp_guided_radius)
        c.dcp.guided_radius = *o.dcp_guided_radius;
    if (o.dcp_guided_eps)
        c.dcp.guided_eps = *o.dcp_guided_eps;
    if (o.no_color_correct) {
        c.gray_world = false;
        c.stretch = false;
    }
    return c;
}

// ---- shared helpers -------------------------------------------------------

json report_to_json(const MetricReport& r) {
    json j;
    j["entropy"] = r.entropy;
    j["avg_gradient"] = r.avg_gradient;
    j["rms_contrast"] = r.rms_contrast;
    j["local_contrast"] = r.local_contrast;
    j["colorfulness"] = r.colorfulness;
    j["dark_channel_mean"] = r.dark_channel_mean;
    if (r.rmse_to_reference)
        j["rmse_to_reference"] = *r.rmse_to_reference;
    return j;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorKind::Io, "cannot write " + path.string());
    f << content;
    if (!f)
        throw Error(ErrorKind::Io, "write failed: " + path.string());
}

std::string failed_row(const std::string& name, const char* kind) {
    return name + ",failed:" + kind + std::string(7, ',');
}

const char* kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::Io:
        return "io";
    case ErrorKind::Format:
        return "format";
    case ErrorKind::Invalid:
        return "invalid";
    default:
        return "numeric";
    }
}

constexpr const char* kCsvComment = "# wavefuse metrics v1\n";

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// ---- commands -------------------------------------------------------------

int do_enhance(const std::string& input, const std::string& output, const Overrides& o,
               const std::vector<std::string>& raw_args, std::ostream& out) {
    PipelineConfig cfg = build_config(o);

    auto t0 = Clock::now();
    ImagePlanar img = load_image(input);
    double load_ms = ms_since(t0);

    t0 = Clock::now();
    std::vector<PassRecord> passes;
    ImagePlanar result = iterate(img, cfg, &passes);
    double enhance_ms = ms_since(t0);

    t0 = Clock::now();
    save_image(result, output);
    double save_ms = ms_since(t0);

    json m;
    m["tool"] = "wavefuse";
    m["version"] = kVersion;
    m["command"] = raw_args;
    m["input"] = input;
    m["output"] = output;
    m["config"] = config_to_json(cfg);
    m["passes"] = json::array();
    for (const PassRecord& p : passes)
        m["passes"].push_back({{"pass", p.pass},
                               {"rms_change", p.rms_change},
                               {"dark_channel_mean", p.dark_channel_mean}});
    m["metrics"]["input"] = report_to_json(report(img));
    m["metrics"]["output"] = report_to_json(report(result));
    m["timing_ms"] = {{"load", load_ms}, {"enhance", enhance_ms}, {"save", save_ms}};
    write_text_file(output + ".manifest.json", m.dump(2) + "\n");

    out << output << "\n";
    return 0;
}

int do_metrics(const std::vector<std::string>& images, const std::vector<std::string>& refs,
               const std::string& out_path, std::ostream& out) {
    if (!refs.empty() && refs.size() != 1 && refs.size() != images.size())
        throw UsageError("--reference count must be 0, 1, or match the image count");

    std::string csv = kCsvComment + metric_csv_header() + "\n";
    ImagePlanar shared_ref;
    if (refs.size() == 1)
        shared_ref = load_image(refs[0]);
    for (std::size_t i = 0; i < images.size(); ++i) {
        ImagePlanar img = load_image(images[i]);
        const ImagePlanar* ref = nullptr;
        ImagePlanar own_ref;
        if (refs.size() == 1) {
            ref = &shared_ref;
        } else if (!refs.empty()) {
            own_ref = load_image(refs[i]);
            ref = &own_ref;
        }
        if (ref && !img.same_shape(*ref))
            throw UsageError("image and reference shapes differ: " + images[i]);
        csv += metric_csv_row(images[i], report(img, ref)) + "\n";
    }
    if (out_path.empty())
        out << csv;
    else
        write_text_file(out_path, csv);
    return 0;
}

struct SynthOptions {
    std::vector<std::string> inputs;
    std::string out_dir;
    std::uint64_t seed = 1;
    int count = 5;
    std::string size = "128x128";
    std::string t_list = "0.4,0.6,0.8";
    double airlight = 0.85;
    std::string cast;
    bool no_haze = false;
};

int do_synth(const SynthOptions& so, std::ostream& out) {
    fs::create_directories(so.out_dir);

    std::pair<int, int> hw{0, 0};
    {
        std::size_t x = so.size.find('x');
        if (x == std::string::npos)
            throw UsageError("--size must look like 128x128");
        try {
            hw.first = std::stoi(so.size.substr(0, x));
            hw.second = std::stoi(so.size.substr(x + 1));
        } catch (const std::exception&) {
            throw UsageError("--size must look like 128x128");
        }
    }

    std::vector<double> ts;
    if (!so.no_haze)
        ts = parse_double_list(so.t_list, "--t");

    std::array<double, 3> cast{};
    bool do_cast = !so.cast.empty();
    if (do_cast) {
        if (so.cast == "green") {
            cast = {0.3, 0.9, 0.8};
        } else {
            std::vector<double> v = parse_double_list(so.cast, "--cast");
            if (v.size() != 3)
                throw UsageError("--cast needs a preset name or three values");
            cast = {v[0], v[1], v[2]};
        }
    }

    struct CleanEntry {
        std::string name;
        ImagePlanar img;
    };
    std::vector<CleanEntry> cleans;
    if (!so.inputs.empty()) {
        for (const std::string& p : so.inputs)
            cleans.push_back({fs::path(p).stem().string(), load_image(p)});
    } else {
        for (int i = 0; i < so.count; ++i)
            cleans.push_back({"scene" + std::to_string(i),
                              make_test_scene(i, hw.first, hw.second, so.seed)});
    }

    json manifest;
    manifest["tool"] = "wavefuse";
    manifest["version"] = kVersion;
    manifest["seed"] = so.seed;
    manifest["entries"] = json::array();

    for (const CleanEntry& ce : cleans) {
        fs::path clean_path = fs::path(so.out_dir) / (ce.name + ".png");
        save_image(ce.img, clean_path.string());
        out << clean_path.string() << "\n";

        for (double t : ts) {
            HazeModel model;
            model.t = t;
            model.airlight = {so.airlight, so.airlight, so.airlight};
            ImagePlanar hazy = apply_haze(ce.img, model);
            fs::path p = fs::path(so.out_dir) / (ce.name + "_haze_t" + fmt_num(t) + ".png");
            save_image(hazy, p.string());
            out << p.string() << "\n";
            manifest["entries"].push_back({{"degraded", p.string()},
                                           {"clean", clean_path.string()},
                                           {"type", "haze"},
                                           {"t", t},
                                           {"airlight", {so.airlight, so.airlight, so.airlight}}});
        }
        if (do_cast) {
            ImagePlanar casted = apply_underwater_cast(ce.img, cast);
            fs::path p = fs::path(so.out_dir) / (ce.name + "_cast.png");
            save_image(casted, p.string());
            out << p.string() << "\n";
            manifest["entries"].push_back({{"degraded", p.string()},
                                           {"clean", clean_path.string()},
                                           {"type", "cast"},
                                           {"attenuation", {cast[0], cast[1], cast[2]}}});
        }
    }
    write_text_file(fs::path(so.out_dir) / "synth_manifest.json", manifest.dump(2) + "\n");
    return 0;
}

int do_batch(const std::vector<std::string>& inputs, const std::string& out_dir, int jobs,
             const Overrides& o, std::ostream& out) {
    if (jobs < 1)
        throw UsageError("--jobs must be >= 1");
    PipelineConfig cfg = build_config(o);
    fs::create_directories(out_dir);

    struct Item {
        std::string row, line;
        bool failed = false;
        ErrorKind kind = ErrorKind::Invalid;
    };
    std::vector<Item> items(inputs.size());

    auto process = [&](std::size_t i) {
        std::string name = fs::path(inputs[i]).stem().string();
        name += std::string("_") + algo_name(cfg.algo) + ".png";
        fs::path out_path = fs::path(out_dir) / name;
        try {
            ImagePlanar img = load_image(inputs[i]);
            ImagePlanar result = iterate(img, cfg);
            save_image(result, out_path.string());
            items[i].row = metric_csv_row(name, report(result));
            items[i].line = out_path.string();
        } catch (const Error& e) {
            items[i].failed = true;
            items[i].kind = e.kind();
            items[i].row = failed_row(name, kind_name(e.kind()));
            items[i].line = inputs[i] + ": " + e.what();
        }
    };

    if (jobs == 1 || inputs.size() <= 1) {
        for (std::size_t i = 0; i < inputs.size(); ++i)
            process(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        int n = jobs < static_cast<int>(inputs.size()) ? jobs
                                                       : static_cast<int>(inputs.size());
        for (int t = 0; t < n; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < inputs.size();
                     i = next.fetch_add(1))
                    process(i);
            });
        for (std::thread& t : pool)
            t.join();
    }

    std::string csv = kCsvComment + metric_csv_header() + "\n";
    json manifest;
    manifest["tool"] = "wavefuse";
    manifest["version"] = kVersion;
    manifest["config"] = config_to_json(cfg);
    manifest["entries"] = json::array();
    bool any_hard = false, any_soft = false;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        csv += items[i].row + "\n";
        out << items[i].line << "\n";
        manifest["entries"].push_back(
            {{"input", inputs[i]}, {"status", items[i].failed ? "failed" : "ok"}});
        if (items[i].failed) {
            if (items[i].kind == ErrorKind::Io || items[i].kind == ErrorKind::Format)
                any_soft = true;
            else
                any_hard = true;
        }
    }
    write_text_file(fs::path(out_dir) / "batch_metrics.csv", csv);
    write_text_file(fs::path(out_dir) / "batch_manifest.json", manifest.dump(2) + "\n");
    return any_hard ? 3 : (any_soft ? 2 : 0);
}

PipelineConfig apply_sweep_param(PipelineConfig cfg, const std::string& param, double v) {
    auto as_int = [&](const char* what) {
        if (v != std::floor(v))
            throw UsageError(std::string(what) + " requires integer values");
        return static_cast<int>(v);
    };
    if (param == "scales")
        cfg.scales = as_int("scales");
    else if (param == "alpha")
        cfg.alpha = v;
    else if (param == "frac-gain" || param == "frac_gain")
        cfg.frac_gain = v;
    else if (param == "iterations")
        cfg.outer_iterations = as_int("iterations");
    else if (param == "kappa")
        cfg.diffusion.kappa = v;
    else if (param == "lambda")
        cfg.diffusion.lambda = v;
    else
        throw UsageError("unknown sweep parameter '" + param +
                         "' (expected scales|alpha|frac-gain|iterations|kappa|lambda)");
    return cfg;
}

int do_sweep(const std::string& input, const std::string& param, const std::string& values,
             const std::string& out_dir, const Overrides& o, std::ostream& out) {
    PipelineConfig base = build_config(o);
    std::vector<double> vals = parse_double_list(values, "--values");
    std::sort(vals.begin(), vals.end());
    // surface unknown-parameter mistakes before any work happens
    apply_sweep_param(base, param, vals[0]);

    fs::create_directories(out_dir);
    ImagePlanar img = load_image(input);
    std::string stem = fs::path(input).stem().string();

    std::string csv = kCsvComment;
    csv += "param,value," + metric_csv_header() + "\n";
    bool any_failed = false;
    for (double v : vals) {
        std::string name = stem + "_" + param + "_" + fmt_num(v) + ".png";
        std::string prefix = param + "," + fmt_num(v) + ",";
        try {
            PipelineConfig cfg = apply_sweep_param(base, param, v);
            ImagePlanar result = iterate(img, cfg);
            fs::path p = fs::path(out_dir) / name;
            save_image(result, p.string());
            csv += prefix + metric_csv_row(name, report(result)) + "\n";
            out << p.string() << "\n";
        } catch (const Error& e) {
            any_failed = true;
            csv += prefix + failed_row(name, kind_name(e.kind())) + "\n";
            out << name << ": " << e.what() << "\n";
        }
    }
    write_text_file(fs::path(out_dir) / ("sweep_" + param + ".csv"), csv);
    return any_failed ? 3 : 0;
}

} // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"wavefuse: multiscale wavelet and fusion-based image enhancement"};
    app.require_subcommand(1);

    Overrides o;

    // enhance
    std::string in_path, out_positional, out_flag;
    CLI::App* enhance = app.add_subcommand("enhance", "Enhance a single image");
    enhance->add_option("input", in_path, "input image (PNG/PPM/PGM)")->required();
    enhance->add_option("output", out_positional, "output image path");
    enhance->add_option("--out", out_flag, "output image path");
    add_config_flags(enhance, o);

    // sweep
    std::string sweep_param, sweep_values, sweep_out = ".";
    CLI::App* sweep = app.add_subcommand("sweep", "Sweep one parameter over a value list");
    sweep->add_option("input", in_path, "input image")->required();
    sweep->add_option("--param", sweep_param, "parameter to sweep")->required();
    sweep->add_option("--values", sweep_values, "comma-separated values")->required();
    sweep->add_option("--out", sweep_out, "output directory");
    add_config_flags(sweep, o);

    // batch
    std::vector<std::string> batch_inputs;
    std::string batch_out = ".";
    int jobs = 1;
    CLI::App* batch = app.add_subcommand("batch", "Enhance many images");
    batch->add_option("inputs", batch_inputs, "input images")->required();
    batch->add_option("--out", batch_out, "output directory");
    batch->add_option("--jobs", jobs, "worker threads (results are identical)");
    add_config_flags(batch, o);

    // synth
    SynthOptions so;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic degraded corpus");
    synth->add_option("inputs", so.inputs, "clean images (omit to generate scenes)");
    synth->add_option("--out", so.out_dir, "output directory")->required();
    synth->add_option("--seed", so.seed, "scene generator seed");
    synth->add_option("--count", so.count, "number of generated scenes");
    synth->add_option("--size", so.size, "generated scene size HxW");
    synth->add_option("--t", so.t_list, "comma-separated haze transmissions");
    synth->add_option("--airlight", so.airlight, "scalar airlight");
    synth->add_option("--cast", so.cast, "underwater cast: 'green' or r,g,b");
    synth->add_flag("--no-haze", so.no_haze, "skip haze variants");

    // metrics
    std::vector<std::string> metric_images, metric_refs;
    std::string metrics_out;
    CLI::App* metrics = app.add_subcommand("metrics", "Emit a metric CSV for images");
    metrics->add_option("images", metric_images, "images to measure")->required();
    metrics->add_option("--reference", metric_refs,
                        "reference image(s): one for all, or one per image");
    metrics->add_option("--out", metrics_out, "CSV path (default: stdout)");

    CLI::App* version = app.add_subcommand("version", "Print the tool version");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("wavefuse");
    for (const std::string& a : args)
        argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*version) {
            out << "wavefuse " << kVersion << "\n";
            return 0;
        }
        if (*enhance) {
            std::string output = !out_flag.empty() ? out_flag : out_positional;
            if (output.empty())
                throw UsageError("enhance: no output path (positional or --out)");
            return do_enhance(in_path, output, o, args, out);
        }
        if (*sweep)
            return do_sweep(in_path, sweep_param, sweep_values, sweep_out, o, out);
        if (*batch)
            return do_batch(batch_inputs, batch_out, jobs, o, out);
        if (*synth)
            return do_synth(so, out);
        if (*metrics)
            return do_metrics(metric_images, metric_refs, metrics_out, out);
        err << "error: no command\n";
        return 1;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::Io || e.kind() == ErrorKind::Format ? 2 : 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace wavefuse
