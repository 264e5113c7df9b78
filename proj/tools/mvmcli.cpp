// Command-line front end: phantom dataset generation, training, evaluation,
// baselines, ablations, velocity curves, report rendering.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "mvm/harness.hpp"
#include "mvm/png.hpp"
#include "mvm/rng.hpp"

namespace {

using namespace mvm;
using nlohmann::json;

struct PhantomDatasetOptions {
    std::string out_dir = "data";
    int subjects = 30;
    int series_per_subject = 1;
    int train_subjects = 20;
    int val_subjects = 5;
    int test_subjects = 5;
    int frames = 50;
    int size = 64;
    double noise_sigma = 0.02;
    uint64_t seed = 7;
    std::string config_path;  // optional base PhantomConfig overrides
};

PhantomConfig base_config_from_json(const std::string& path) {
    PhantomConfig base;
    if (path.empty()) return base;
    std::ifstream in(path);
    if (!in) throw IoError("missing phantom config: " + path);
    json j = json::parse(in);
    base.frames = j.value("frames", base.frames);
    base.height = j.value("height", base.height);
    base.width = j.value("width", base.width);
    base.endo_radius_mm = j.value("endo_radius_mm", base.endo_radius_mm);
    base.epi_radius_mm = j.value("epi_radius_mm", base.epi_radius_mm);
    base.radial_amplitude = j.value("radial_amplitude", base.radial_amplitude);
    base.twist_amplitude_rad = j.value("twist_amplitude_rad", base.twist_amplitude_rad);
    base.longitudinal_amplitude = j.value("longitudinal_amplitude", base.longitudinal_amplitude);
    base.noise_sigma = j.value("noise_sigma", base.noise_sigma);
    return base;
}

int run_phantom(const PhantomDatasetOptions& opt) {
    if (opt.train_subjects + opt.val_subjects + opt.test_subjects != opt.subjects)
        throw ArgumentError("phantom: train+val+test subjects must equal --subjects");
    PhantomConfig base = base_config_from_json(opt.config_path);
    base.frames = opt.frames;
    base.height = opt.size;
    base.width = opt.size;
    base.noise_sigma = opt.noise_sigma;

    DatasetSplit split;
    Rng rng(opt.seed);
    for (int s = 0; s < opt.subjects; ++s) {
        for (int slice = 0; slice < opt.series_per_subject; ++slice) {
            PhantomConfig cfg = base;
            cfg.subject_id = "subject" + std::to_string(s);
            cfg.slice_id = "slice" + std::to_string(slice);
            cfg.seed = opt.seed * 1000003ULL + static_cast<uint64_t>(s * 31 + slice);
            // per-subject anatomy/motion jitter
            cfg.endo_radius_mm = base.endo_radius_mm + 1.2 * (rng.uniform01() - 0.5);
            cfg.epi_radius_mm = base.epi_radius_mm + 2.0 * (rng.uniform01() - 0.5);
            cfg.center_y = (static_cast<double>(cfg.height) - 1) / 2.0 + 4.0 * (rng.uniform01() - 0.5);
            cfg.center_x = (static_cast<double>(cfg.width) - 1) / 2.0 + 4.0 * (rng.uniform01() - 0.5);
            cfg.radial_amplitude = base.radial_amplitude + 0.05 * (rng.uniform01() - 0.5);
            cfg.twist_amplitude_rad = base.twist_amplitude_rad + 0.2 * (rng.uniform01() - 0.5);
            cfg.longitudinal_amplitude = base.longitudinal_amplitude + 8.0 * (rng.uniform01() - 0.5);

            const MVMSeries series = generate_phantom(cfg);
            const auto dir = std::filesystem::path(opt.out_dir) /
                             (cfg.subject_id + "_" + cfg.slice_id);
            save_series(series, dir);
            if (s < opt.train_subjects)
                split.train.push_back(dir.string());
            else if (s < opt.train_subjects + opt.val_subjects)
                split.val.push_back(dir.string());
            else
                split.test.push_back(dir.string());
        }
    }
    validate_split(split);
    const auto split_path = std::filesystem::path(opt.out_dir) / "split.json";
    save_split(split, split_path);
    std::cout << "wrote " << opt.subjects * opt.series_per_subject << " series under " << opt.out_dir
              << " (split: " << split.train.size() << "/" << split.val.size() << "/"
              << split.test.size() << ")\n";
    return 0;
}

void apply_train_overrides(TrainConfig& cfg, const std::string& split, int max_steps, int seed,
                           const std::string& ckpt_dir, int base_channels, int threads) {
    if (!split.empty()) cfg.split_path = split;
    if (max_steps > 0) cfg.max_steps = max_steps;
    if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);
    if (!ckpt_dir.empty()) cfg.checkpoint_dir = ckpt_dir;
    if (base_channels > 0) cfg.net.base_channels = base_channels;
    if (threads > 0) cfg.threads = threads;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cine myocardial velocity-mapping frame synthesis toolkit"};
    app.require_subcommand(1);

    // ---- phantom ----
    PhantomDatasetOptions ph;
    auto* cmd_phantom = app.add_subcommand("phantom", "generate a phantom dataset with a subject split");
    cmd_phantom->add_option("--out", ph.out_dir, "output directory");
    cmd_phantom->add_option("--subjects", ph.subjects, "number of subjects");
    cmd_phantom->add_option("--series-per-subject", ph.series_per_subject, "series per subject");
    cmd_phantom->add_option("--train", ph.train_subjects, "training subjects");
    cmd_phantom->add_option("--val", ph.val_subjects, "validation subjects");
    cmd_phantom->add_option("--test", ph.test_subjects, "test subjects");
    cmd_phantom->add_option("--frames", ph.frames, "frames per cycle");
    cmd_phantom->add_option("--size", ph.size, "image height/width");
    cmd_phantom->add_option("--noise", ph.noise_sigma, "noise sigma");
    cmd_phantom->add_option("--seed", ph.seed, "dataset seed");
    cmd_phantom->add_option("--config", ph.config_path, "base phantom config JSON");

    // ---- train ----
    std::string train_cfg_path, train_split, train_ckpt_dir;
    int train_steps = 0, train_seed = -1, train_base = 0, train_threads = 0;
    auto* cmd_train = app.add_subcommand("train", "train the synthesis network");
    cmd_train->add_option("--config", train_cfg_path, "train config JSON");
    cmd_train->add_option("--split", train_split, "split.json path");
    cmd_train->add_option("--max-steps", train_steps, "cap on optimizer steps");
    cmd_train->add_option("--seed", train_seed, "seed override");
    cmd_train->add_option("--checkpoint-dir", train_ckpt_dir, "checkpoint directory");
    cmd_train->add_option("--base-channels", train_base, "network width override");
    cmd_train->add_option("--threads", train_threads, "worker threads (or MVM_THREADS)");

    // ---- evaluate / baseline ----
    std::string eval_ckpt, eval_split, eval_report = "report.json", eval_figdir, eval_methods =
        "linear,hs_flow,model";
    bool eval_gt_masks = false;
    int eval_threads = 0;
    auto* cmd_eval = app.add_subcommand("evaluate", "score methods on the test split");
    cmd_eval->add_option("--checkpoint", eval_ckpt, "model checkpoint");
    cmd_eval->add_option("--split", eval_split, "split.json path")->required();
    cmd_eval->add_option("--report", eval_report, "report JSON output");
    cmd_eval->add_option("--figures", eval_figdir, "figure output directory");
    cmd_eval->add_option("--methods", eval_methods, "comma list: linear,hs_flow,model");
    cmd_eval->add_flag("--gt-masks", eval_gt_masks, "use gt masks for velocity evaluation");
    cmd_eval->add_option("--threads", eval_threads, "worker threads");

    std::string base_split, base_report = "report.json", base_methods = "linear,hs_flow";
    auto* cmd_base = app.add_subcommand("baseline", "score classical baselines on the test split");
    cmd_base->add_option("--split", base_split, "split.json path")->required();
    cmd_base->add_option("--report", base_report, "report JSON output");
    cmd_base->add_option("--methods", base_methods, "comma list: linear,hs_flow");

    // ---- ablate ----
    std::string abl_cfg_path, abl_report = "ablation_report.json", abl_split;
    int abl_steps = 0, abl_seed = -1, abl_base = 0, abl_threads = 0;
    auto* cmd_abl = app.add_subcommand("ablate", "train and score the four ablation rows");
    cmd_abl->add_option("--config", abl_cfg_path, "base train config JSON");
    cmd_abl->add_option("--split", abl_split, "split.json path");
    cmd_abl->add_option("--max-steps", abl_steps, "cap on optimizer steps per row");
    cmd_abl->add_option("--seed", abl_seed, "seed override");
    cmd_abl->add_option("--base-channels", abl_base, "network width override");
    cmd_abl->add_option("--report", abl_report, "report JSON output");
    cmd_abl->add_option("--threads", abl_threads, "worker threads");

    // ---- velocity ----
    std::string vel_series, vel_out = "curves.json", vel_plots;
    auto* cmd_vel = app.add_subcommand("velocity", "extract velocity curves from a series archive");
    cmd_vel->add_option("--series", vel_series, "series archive directory")->required();
    cmd_vel->add_option("--out", vel_out, "curves JSON output");
    cmd_vel->add_option("--plots", vel_plots, "optional plot directory");

    // ---- report ----
    std::string rep_in;
    auto* cmd_rep = app.add_subcommand("report", "render a report JSON as tables");
    cmd_rep->add_option("--in", rep_in, "report JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_phantom) return run_phantom(ph);

        if (*cmd_train) {
            TrainConfig cfg = train_cfg_path.empty() ? TrainConfig{}
                                                     : train_config_from_json_file(train_cfg_path);
            apply_train_overrides(cfg, train_split, train_steps, train_seed, train_ckpt_dir,
                                  train_base, train_threads);
            if (cfg.split_path.empty()) throw ArgumentError("train: --split or config split required");
            TrainResult result = train(cfg);
            std::cout << "finished at step " << result.meta.step << "; best checkpoint in "
                      << cfg.checkpoint_dir << "\n";
            return 0;
        }

        auto parse_methods = [](const std::string& csv) {
            std::set<std::string> out;
            std::stringstream ss(csv);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) out.insert(tok);
            return out;
        };

        if (*cmd_eval || *cmd_base) {
            const std::string split_path = *cmd_eval ? eval_split : base_split;
            const DatasetSplit split = load_split(split_path);
            Dataset test = load_dataset(split.test);

            EvaluateOptions opts;
            opts.methods = parse_methods(*cmd_eval ? eval_methods : base_methods);
            opts.gt_masks_for_velocity = eval_gt_masks;
            opts.threads = eval_threads;

            std::unique_ptr<net::MTAttentionUNet<float>> model;
            if (opts.methods.count("model")) {
                if (eval_ckpt.empty())
                    throw ArgumentError("evaluate: --checkpoint required for method 'model'");
                const auto peek = net::peek_checkpoint(eval_ckpt);
                model = std::make_unique<net::MTAttentionUNet<float>>(peek.config);
                net::load_checkpoint(*model, eval_ckpt);
            }
            ExperimentReport report = evaluate(model.get(), test, opts);
            report.seed = 0;
            report.config_hash = hash_string(split_path + (*cmd_eval ? eval_methods : base_methods));
            save_report_json(report, *cmd_eval ? eval_report : base_report);
            std::cout << render_method_table(report);
            for (const auto& m : report.methods)
                for (const auto& f : m.failures) std::cerr << "failure (" << m.method << "): " << f << "\n";
            if (*cmd_eval && !eval_figdir.empty() && model) {
                const auto files = emit_figures(*model, test.series.front(), eval_figdir);
                std::cout << "wrote " << files.size() << " figures to " << eval_figdir << "\n";
            }
            return 0;
        }

        if (*cmd_abl) {
            TrainConfig cfg = abl_cfg_path.empty() ? TrainConfig{}
                                                   : train_config_from_json_file(abl_cfg_path);
            apply_train_overrides(cfg, abl_split, abl_steps, abl_seed, "", abl_base, abl_threads);
            if (cfg.split_path.empty()) throw ArgumentError("ablate: --split or config split required");
            ExperimentReport report = run_ablations(cfg);
            save_report_json(report, abl_report);
            std::cout << render_ablation_table(report);
            return 0;
        }

        if (*cmd_vel) {
            const MVMSeries series = load_series(vel_series);
            const VelocityCurves curves = velocity_curves(series);
            json j;
            j["unit"] = "mm per frame-interval (in-plane), amplitude unit (longitudinal)";
            j["longitudinal"] = curves.longitudinal;
            j["radial"] = curves.radial;
            j["circumferential"] = curves.circumferential;
            std::ofstream out(vel_out, std::ios::trunc);
            out << j.dump(2) << "\n";
            std::cout << "wrote " << vel_out << "\n";
            if (!vel_plots.empty()) {
                const auto files = write_velocity_plots(curves, nullptr, vel_plots);
                std::cout << "wrote " << files.size() << " plots to " << vel_plots << "\n";
            }
            return 0;
        }

        if (*cmd_rep) {
            const ExperimentReport report = load_report_json(rep_in);
            if (!report.methods.empty()) std::cout << render_method_table(report);
            if (!report.ablation.empty()) std::cout << render_ablation_table(report);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
