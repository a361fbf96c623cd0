#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pllt/config.hpp"
#include "pllt/run.hpp"

namespace fs = std::filesystem;

namespace {

std::string exe_dir() {
    std::error_code ec;
    const fs::path p = fs::read_symlink("/proc/self/exe", ec);
    return ec ? std::string(".") : p.parent_path().string();
}

std::string find_presets(const std::string& flag_path) {
    if (!flag_path.empty()) {
        if (!fs::exists(flag_path))
            throw pllt::ConfigError("preset file not found: " + flag_path);
        return flag_path;
    }
    if (const char* env = std::getenv("PLLT_PRESETS"); env && fs::exists(env)) return env;
    const std::string exe = exe_dir();
    for (const std::string& cand :
         {std::string("presets.cfg"), exe + "/presets.cfg",
          exe + "/../share/pllt/presets.cfg"})
        if (fs::exists(cand)) return cand;
    return "";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw pllt::ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::string preset;
    std::string presets_path;
    int jobs = 1;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "run configuration file");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--preset", args.preset,
                    "target-resonance preset kappa:upsilon (e.g. 1:1, 2:1, 1:3)");
    sub->add_option("--presets", args.presets_path, "preset table file");
    sub->add_option("--jobs", args.jobs, "worker threads for independent tasks");
}

int run_experiment(const CommonArgs& args, const std::string& kind) {
    pllt::PresetTable presets;
    const std::string preset_path = find_presets(args.presets_path);
    if (!preset_path.empty()) presets = pllt::load_presets(preset_path);

    std::string text = args.config_path.empty() ? "" : read_file(args.config_path);
    if (!args.preset.empty()) text += "\npreset = " + args.preset + "\n";
    text += "\nexperiment.kind = " + kind + "\n";

    pllt::RunConfig cfg = pllt::load_config_text(text, presets);
    cfg.out_dir = args.out_dir;
    cfg.jobs = std::max(1, args.jobs);

    const pllt::RunManifest manifest = pllt::run(cfg);
    std::cout << (manifest.success() ? "ok: " : "FAILED: ") << manifest.outcome << "\n";
    std::cout << "artifacts in " << cfg.out_dir << " (" << manifest.files.size()
              << " files, " << manifest.wall_ms << " ms, " << manifest.integration_steps
              << " integration steps)\n";
    if (!manifest.summary_json.empty()) std::cout << manifest.summary_json << "\n";
    return manifest.success() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Virtual phase-locked-loop vibration testing laboratory"};
    app.require_subcommand(1);

    CommonArgs args;
    const std::vector<std::string> kinds{"nfrc", "backbone", "transfer", "basin", "hbm"};
    for (const auto& kind : kinds) {
        CLI::App* sub = app.add_subcommand(
            kind, kind == "nfrc"       ? "trace an NFRC by sweeping the reference phase lag"
                  : kind == "backbone" ? "trace a backbone by sweeping the force amplitude"
                  : kind == "transfer" ? "rest-to-resonance state transfer"
                  : kind == "basin"    ? "basin-of-attraction scan"
                                       : "harmonic-balance reference branches");
        add_common(sub, args);
    }

    std::string cmp_a, cmp_b;
    double tol_amp = 0.01, tol_phase_deg = 1.0;
    int harmonic = 1;
    CLI::App* cmp = app.add_subcommand("compare", "compare two result curves");
    cmp->add_option("fileA", cmp_a, "curve under test")->required();
    cmp->add_option("fileB", cmp_b, "reference curve")->required();
    cmp->add_option("--tol-amp", tol_amp, "relative amplitude tolerance");
    cmp->add_option("--tol-phase-deg", tol_phase_deg, "phase tolerance [deg]");
    cmp->add_option("--harmonic", harmonic, "amplitude column when A_total is absent");

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& kind : kinds)
            if (app.got_subcommand(kind)) return run_experiment(args, kind);

        if (app.got_subcommand("compare")) {
            pllt::CompareOptions opts;
            opts.tol_amp = tol_amp;
            opts.tol_phase_deg = tol_phase_deg;
            opts.harmonic = harmonic;
            const pllt::CompareReport rep = pllt::compare_files(cmp_a, cmp_b, opts);
            std::cout << "points compared: " << rep.points << "\n"
                      << "max relative amplitude deviation: " << rep.max_amp_dev << "\n"
                      << "rms relative amplitude deviation: " << rep.rms_amp_dev << "\n";
            if (!std::isnan(rep.max_phase_dev))
                std::cout << "max phase deviation [deg]: "
                          << rep.max_phase_dev * 180.0 / pllt::kPi << "\n";
            std::cout << (rep.pass ? "PASS" : "FAIL") << "\n";
            return rep.pass ? 0 : 1;
        }
    } catch (const pllt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
