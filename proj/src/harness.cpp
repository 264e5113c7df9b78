#include "mvm/harness.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "mvm/rng.hpp"
#include "mvm/sha256.hpp"

namespace mvm {

namespace {

using nlohmann::json;
using net::MTAttentionUNet;
using net::NetInputs;
using net::NetOutputs;

json net_config_to_json(const net::NetworkConfig& c) {
    return json{{"base_channels", c.base_channels},
                {"depth", c.depth},
                {"independent_encoders", c.independent_encoders},
                {"independent_decoders", c.independent_decoders},
                {"shared_bottleneck", c.shared_bottleneck},
                {"use_attention", c.use_attention}};
}

void net_config_from_json(const json& j, net::NetworkConfig& c) {
    c.base_channels = j.value("base_channels", c.base_channels);
    c.depth = j.value("depth", c.depth);
    c.independent_encoders = j.value("independent_encoders", c.independent_encoders);
    c.independent_decoders = j.value("independent_decoders", c.independent_decoders);
    c.shared_bottleneck = j.value("shared_bottleneck", c.shared_bottleneck);
    c.use_attention = j.value("use_attention", c.use_attention);
}

json loss_config_to_json(const LossConfig& c) {
    return json{{"w_syn", c.w_syn},
                {"w_seg", c.w_seg},
                {"weighted", c.weighted},
                {"background_floor", c.background_floor},
                {"bg_threshold", c.bg_threshold},
                {"dilation_px", c.dilation_px},
                {"dice_smooth", c.dice_smooth}};
}

void loss_config_from_json(const json& j, LossConfig& c) {
    c.w_syn = j.value("w_syn", c.w_syn);
    c.w_seg = j.value("w_seg", c.w_seg);
    c.weighted = j.value("weighted", c.weighted);
    c.background_floor = j.value("background_floor", c.background_floor);
    c.bg_threshold = j.value("bg_threshold", c.bg_threshold);
    c.dilation_px = j.value("dilation_px", c.dilation_px);
    c.dice_smooth = j.value("dice_smooth", c.dice_smooth);
}

LossBreakdown sample_loss(const SynthesisSample& sample, const NetOutputs<float>& out,
                          const LossConfig& loss_cfg, LossGrads* grads) {
    const ImageF mag_pred = out.mag_pred.plane_copy(0);
    const std::array<ImageF, 3> phase_pred = {out.phase_pred.plane_copy(0), out.phase_pred.plane_copy(1),
                                              out.phase_pred.plane_copy(2)};
    const ImageF mask_prob = out.mask_prob.plane_copy(0);

    LossInputs in;
    in.mag_pred = &mag_pred;
    in.phase_pred = {&phase_pred[0], &phase_pred[1], &phase_pred[2]};
    in.mask_prob = &mask_prob;
    in.mag_target = &sample.mag_target;
    in.phase_target = {&sample.phase_target[0], &sample.phase_target[1], &sample.phase_target[2]};
    in.mask_target = &sample.mask_target;
    in.sample_masks = {&sample.mask_in[0], &sample.mask_in[1], &sample.mask_target};
    return total_loss(in, loss_cfg, grads);
}

/// Forward + loss (+ optional backward) for one sample.
LossBreakdown run_sample(MTAttentionUNet<float>& model, const SynthesisSample& sample,
                         const LossConfig& loss_cfg, bool do_backward) {
    const NetInputs<float> inputs = net::make_net_inputs<float>(sample);
    const NetOutputs<float> out = model.forward(inputs);
    LossGrads grads;
    const LossBreakdown breakdown = sample_loss(sample, out, loss_cfg, do_backward ? &grads : nullptr);
    if (do_backward) {
        net::Tensor<float> dmag(1, out.mag_pred.h, out.mag_pred.w);
        dmag.set_plane(0, grads.d_mag);
        net::Tensor<float> dphase(3, out.phase_pred.h, out.phase_pred.w);
        for (int d = 0; d < 3; ++d) dphase.set_plane(d, grads.d_phase[static_cast<size_t>(d)]);
        net::Tensor<float> dmask(1, out.mask_prob.h, out.mask_prob.w);
        dmask.set_plane(0, grads.d_mask_prob);
        model.backward(dmag, dphase, dmask);
    }
    return breakdown;
}

using ParamSnapshot = std::vector<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

ParamSnapshot snapshot_params(MTAttentionUNet<float>& model) {
    ParamSnapshot snap;
    model.visit_params([&](const std::string&, auto& w, auto&) { snap.push_back(w); });
    return snap;
}

ParamSnapshot snapshot_grads(MTAttentionUNet<float>& model) {
    ParamSnapshot snap;
    model.visit_params([&](const std::string&, auto&, auto& g) { snap.push_back(g); });
    return snap;
}

void restore_params(MTAttentionUNet<float>& model, const ParamSnapshot& snap) {
    size_t i = 0;
    model.visit_params([&](const std::string&, auto& w, auto&) { w = snap[i++]; });
}

void add_grads(MTAttentionUNet<float>& model, const ParamSnapshot& snap, float scale) {
    size_t i = 0;
    model.visit_params([&](const std::string&, auto&, auto& g) { g += scale * snap[i++]; });
}

double mean_loss_over(MTAttentionUNet<float>& model, const Dataset& data, const LossConfig& loss_cfg,
                      int threads) {
    if (data.samples.empty()) return 0.0;
    const int n = static_cast<int>(data.samples.size());
    std::vector<double> losses(static_cast<size_t>(n), 0.0);
    const int workers = std::max(1, std::min(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int wkr = 0; wkr < workers; ++wkr) {
        pool.emplace_back([&, wkr] {
            MTAttentionUNet<float> local = model;  // read-only copy per worker
            for (int i = wkr; i < n; i += workers) {
                auto [si, tau, k] = data.samples[static_cast<size_t>(i)];
                const SynthesisSample s = make_sample(data.series[static_cast<size_t>(si)], tau, k);
                losses[static_cast<size_t>(i)] = run_sample(local, s, loss_cfg, false).total;
            }
        });
    }
    for (auto& th : pool) th.join();
    double acc = 0;
    for (double v : losses) acc += v;
    return acc / n;
}

}  // namespace

void validate_train_config(const TrainConfig& cfg) {
    if (cfg.learning_rate <= 0) throw ArgumentError("train config: learning_rate must be > 0");
    if (cfg.batch_size < 1) throw ArgumentError("train config: batch_size must be >= 1");
    if (cfg.epochs < 1 && cfg.max_steps < 1)
        throw ArgumentError("train config: need epochs >= 1 or max_steps >= 1");
    if (cfg.loss.w_syn + cfg.loss.w_seg <= 0)
        throw ArgumentError("train config: w_syn + w_seg must be > 0");
}

TrainConfig train_config_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("missing config: " + path.string());
    json j = json::parse(in);
    TrainConfig cfg;
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.max_steps = j.value("max_steps", cfg.max_steps);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.split_path = j.value("split", cfg.split_path);
    cfg.checkpoint_dir = j.value("checkpoint_dir", cfg.checkpoint_dir);
    cfg.eval_every = j.value("eval_every", cfg.eval_every);
    cfg.early_stop_patience = j.value("early_stop_patience", cfg.early_stop_patience);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.log_every = j.value("log_every", cfg.log_every);
    if (j.contains("net")) net_config_from_json(j.at("net"), cfg.net);
    if (j.contains("loss")) loss_config_from_json(j.at("loss"), cfg.loss);
    return cfg;
}

std::string train_config_to_json(const TrainConfig& cfg) {
    json j;
    j["learning_rate"] = cfg.learning_rate;
    j["batch_size"] = cfg.batch_size;
    j["epochs"] = cfg.epochs;
    j["max_steps"] = cfg.max_steps;
    j["seed"] = cfg.seed;
    j["split"] = cfg.split_path;
    j["checkpoint_dir"] = cfg.checkpoint_dir;
    j["eval_every"] = cfg.eval_every;
    j["early_stop_patience"] = cfg.early_stop_patience;
    j["log_every"] = cfg.log_every;
    j["net"] = net_config_to_json(cfg.net);
    j["loss"] = loss_config_to_json(cfg.loss);
    return j.dump(2);
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MVM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

Dataset load_dataset(const std::vector<std::string>& archive_dirs) {
    Dataset out;
    std::string hash_input;
    for (const auto& dir : archive_dirs) {
        out.series.push_back(load_series(dir));
        std::ifstream in(std::filesystem::path(dir) / "manifest.json");
        std::stringstream ss;
        ss << in.rdbuf();
        hash_input += sha256_hex(ss.str().data(), ss.str().size());
    }
    for (size_t si = 0; si < out.series.size(); ++si)
        for (auto [tau, k] : enumerate_sample_indices(out.series[si].frames()))
            out.samples.emplace_back(static_cast<int>(si), tau, k);
    out.hash = sha256_hex(hash_input.data(), hash_input.size());
    return out;
}

TrainResult train(const TrainConfig& cfg) {
    validate_train_config(cfg);
    const DatasetSplit split = load_split(cfg.split_path);
    validate_split(split);
    if (split.train.empty()) throw ArgumentError("train: split has no training series");
    Dataset train_data = load_dataset(split.train);
    Dataset val_data = split.val.empty() ? Dataset{} : load_dataset(split.val);
    if (train_data.samples.empty()) throw ArgumentError("train: no usable samples in training split");

    const int threads = resolve_threads(cfg.threads);
    auto model = std::make_unique<MTAttentionUNet<float>>(cfg.net, cfg.seed);
    net::Adam<float> opt(*model, cfg.learning_rate);

    TrainResult result;
    result.meta.seed = cfg.seed;

    Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<size_t> order(train_data.samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    ParamSnapshot best_params = snapshot_params(*model);
    double best_val = std::numeric_limits<double>::infinity();
    int evals_since_best = 0;
    int64_t step = 0;
    bool stop = false;

    const int steps_per_epoch =
        static_cast<int>((train_data.samples.size() + static_cast<size_t>(cfg.batch_size) - 1) /
                         static_cast<size_t>(cfg.batch_size));
    const int64_t total_steps = cfg.max_steps > 0
                                    ? cfg.max_steps
                                    : static_cast<int64_t>(cfg.epochs) * steps_per_epoch;

    for (int epoch = 0; !stop; ++epoch) {
        if (cfg.max_steps == 0 && epoch >= cfg.epochs) break;
        shuffle_rng.shuffle(order);
        for (int b = 0; b < steps_per_epoch && !stop; ++b) {
            // gather the batch
            std::vector<size_t> batch;
            for (int i = 0; i < cfg.batch_size; ++i)
                batch.push_back(order[(static_cast<size_t>(b) * cfg.batch_size + i) % order.size()]);

            // per-sample gradients, fixed reduction order for determinism
            const int workers = std::max(1, std::min(threads, static_cast<int>(batch.size())));
            std::vector<ParamSnapshot> grads(batch.size());
            std::vector<double> losses(batch.size(), 0.0);
            std::vector<std::string> refs(batch.size());
            std::vector<std::thread> pool;
            for (int wkr = 0; wkr < workers; ++wkr) {
                pool.emplace_back([&, wkr] {
                    MTAttentionUNet<float> local = *model;
                    for (size_t i = static_cast<size_t>(wkr); i < batch.size();
                         i += static_cast<size_t>(workers)) {
                        auto [si, tau, k] = train_data.samples[batch[i]];
                        const SynthesisSample s =
                            make_sample(train_data.series[static_cast<size_t>(si)], tau, k);
                        refs[i] = s.series_ref + " tau=" + std::to_string(tau) +
                                  " k=" + std::to_string(k);
                        local.zero_grad();
                        losses[i] = run_sample(local, s, cfg.loss, true).total;
                        grads[i] = snapshot_grads(local);
                    }
                });
            }
            for (auto& th : pool) th.join();

            double batch_loss = 0;
            for (double v : losses) batch_loss += v;
            batch_loss /= static_cast<double>(batch.size());
            if (!std::isfinite(batch_loss)) {
                std::cerr << "NaN loss at step " << step << "; offending batch:\n";
                for (size_t i = 0; i < batch.size(); ++i)
                    std::cerr << "  " << refs[i] << " loss=" << losses[i] << "\n";
                throw NumericError("training diverged: non-finite loss at step " +
                                   std::to_string(step));
            }

            model->zero_grad();
            const float scale = 1.f / static_cast<float>(batch.size());
            for (const auto& g : grads) add_grads(*model, g, scale);
            opt.step();
            ++step;

            result.meta.loss_history.push_back(batch_loss);
            if (cfg.log_every > 0 && step % cfg.log_every == 0) {
                result.train_loss.push_back(batch_loss);
                std::cout << "step " << step << "/" << total_steps << " loss " << std::setprecision(6)
                          << batch_loss << std::endl;
            }

            const bool time_for_eval = cfg.eval_every > 0 && step % cfg.eval_every == 0;
            if (time_for_eval && !val_data.samples.empty()) {
                const double val = mean_loss_over(*model, val_data, cfg.loss, threads);
                result.val_loss.push_back(val);
                std::cout << "step " << step << " val_loss " << val << std::endl;
                if (val < best_val) {
                    best_val = val;
                    best_params = snapshot_params(*model);
                    evals_since_best = 0;
                } else if (cfg.early_stop_patience > 0 && ++evals_since_best >= cfg.early_stop_patience) {
                    std::cout << "early stop: no validation improvement in "
                              << cfg.early_stop_patience << " evaluations" << std::endl;
                    stop = true;
                }
                if (!cfg.checkpoint_dir.empty()) {
                    net::CheckpointMeta meta{step, cfg.seed, result.meta.loss_history};
                    net::save_checkpoint(*model, meta,
                                         std::filesystem::path(cfg.checkpoint_dir) /
                                             ("step_" + std::to_string(step) + ".ckpt"));
                }
            }
            if (cfg.max_steps > 0 && step >= cfg.max_steps) stop = true;
        }
    }

    if (std::isfinite(best_val))
        restore_params(*model, best_params);  // best-validation parameters
    result.meta.step = step;
    result.model = std::move(model);
    if (!cfg.checkpoint_dir.empty()) {
        net::save_checkpoint(*result.model, result.meta,
                             std::filesystem::path(cfg.checkpoint_dir) / "best.ckpt");
    }
    return result;
}

ReconstructedSeries reconstruct_series(MTAttentionUNet<float>& model, const MVMSeries& gt) {
    ReconstructedSeries recon;
    recon.series = gt;
    recon.masks = gt.mask;
    recon.synthesized.assign(static_cast<size_t>(gt.frames()), false);
    for (int t = 0; t < gt.frames(); ++t) {
        if (t % kAnchorGap == 0) continue;
        const int tau = kAnchorGap * (t / kAnchorGap);
        const int k = t - tau;
        if (tau + kAnchorGap >= gt.frames()) continue;  // tail: keep ground truth
        const SynthesisSample s = make_sample(gt, tau, k);
        const auto out = model.forward(net::make_net_inputs<float>(s));
        const auto idx = static_cast<size_t>(t);
        recon.series.magnitude[idx] = out.mag_pred.plane_copy(0);
        for (int d = 0; d < 3; ++d)
            recon.series.phase[idx][static_cast<size_t>(d)] = out.phase_pred.plane_copy(d);
        recon.masks[idx] = (out.mask_prob.plane_copy(0) > 0.5f).cast<float>();
        recon.synthesized[idx] = true;
    }
    return recon;
}

ExperimentReport evaluate(MTAttentionUNet<float>* model, const Dataset& test,
                          const EvaluateOptions& opts) {
    if (test.series.empty()) throw ArgumentError("evaluate: empty test split");
    const auto t0 = std::chrono::steady_clock::now();
    const int threads = resolve_threads(opts.threads);

    ExperimentReport report;
    report.dataset_hash = test.hash;

    for (const std::string& method : std::set<std::string>{"linear", "hs_flow", "model"}) {
        if (!opts.methods.count(method)) continue;
        if (method == "model" && model == nullptr)
            throw ArgumentError("evaluate: model method requested without a checkpoint");
        MethodScores scores;
        scores.method = method;

        const int n = static_cast<int>(test.samples.size());
        struct Row {
            double mag_mae, mag_psnr, mag_ssim, phase_mae, phase_psnr, phase_ssim;
            double dice = -1;
            bool ok = false;
            std::string error;
        };
        std::vector<Row> rows(static_cast<size_t>(n));

        const int workers = std::max(1, std::min(threads, n));
        std::vector<std::thread> pool;
        for (int wkr = 0; wkr < workers; ++wkr) {
            pool.emplace_back([&, wkr] {
                std::unique_ptr<MTAttentionUNet<float>> local;
                if (method == "model") local = std::make_unique<MTAttentionUNet<float>>(*model);
                // per-series flow cache: consecutive samples share anchors
                int cached_si = -1, cached_tau = -1;
                FlowField cached_flow;
                for (int i = wkr; i < n; i += workers) {
                    auto [si, tau, k] = test.samples[static_cast<size_t>(i)];
                    const SynthesisSample s = make_sample(test.series[static_cast<size_t>(si)], tau, k);
                    Row& row = rows[static_cast<size_t>(i)];
                    try {
                        ImageF mag_pred;
                        std::array<ImageF, 3> phase_pred;
                        if (method == "model") {
                            const auto out = local->forward(net::make_net_inputs<float>(s));
                            mag_pred = out.mag_pred.plane_copy(0);
                            for (int d = 0; d < 3; ++d)
                                phase_pred[static_cast<size_t>(d)] = out.phase_pred.plane_copy(d);
                            const ImageF pred_mask =
                                (out.mask_prob.plane_copy(0) > 0.5f).cast<float>();
                            row.dice = dice_score(pred_mask, s.mask_target);
                        } else if (method == "linear") {
                            const auto pred = baseline_synthesize(s, BaselineMethod::linear);
                            mag_pred = pred.mag_pred;
                            phase_pred = pred.phase_pred;
                        } else {
                            // reuse the flow for the three k of one anchor pair
                            if (cached_si != si || cached_tau != tau) {
                                cached_flow = horn_schunck_flow(s.mag_in[0], s.mag_in[1], opts.hs);
                                cached_si = si;
                                cached_tau = tau;
                            }
                            mag_pred = flow_interpolate(s.mag_in[0], s.mag_in[1], cached_flow, k);
                            for (int d = 0; d < 3; ++d)
                                phase_pred[static_cast<size_t>(d)] = flow_interpolate(
                                    s.phase_in[static_cast<size_t>(2 * d)],
                                    s.phase_in[static_cast<size_t>(2 * d + 1)], cached_flow, k);
                        }
                        row.mag_mae = mae(mag_pred, s.mag_target);
                        row.mag_psnr = psnr(mag_pred, s.mag_target);
                        row.mag_ssim = ssim(mag_pred, s.mag_target);
                        std::vector<const ImageF*> pp = {&phase_pred[0], &phase_pred[1], &phase_pred[2]};
                        std::vector<const ImageF*> pt = {&s.phase_target[0], &s.phase_target[1],
                                                         &s.phase_target[2]};
                        row.phase_mae = mae(pp, pt);
                        row.phase_psnr = psnr(pp, pt);
                        double ssim_acc = 0;
                        for (int d = 0; d < 3; ++d)
                            ssim_acc += ssim(phase_pred[static_cast<size_t>(d)],
                                             s.phase_target[static_cast<size_t>(d)], 2.0);
                        row.phase_ssim = ssim_acc / 3.0;
                        row.ok = true;
                    } catch (const std::exception& e) {
                        row.error = s.series_ref + ": " + e.what();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();

        for (const Row& row : rows) {
            if (!row.ok) {
                scores.failures.push_back(row.error);
                continue;
            }
            scores.metrics.add("magnitude_mae", row.mag_mae);
            scores.metrics.add("magnitude_psnr", row.mag_psnr);
            scores.metrics.add("magnitude_ssim", row.mag_ssim);
            scores.metrics.add("phase_mae", row.phase_mae);
            scores.metrics.add("phase_psnr", row.phase_psnr);
            scores.metrics.add("phase_ssim", row.phase_ssim);
            if (row.dice >= 0) scores.metrics.add("dice", row.dice);
        }

        // velocity coefficient per test series on the reconstructed cine
        if (method == "model") {
            for (const MVMSeries& gt : test.series) {
                try {
                    ReconstructedSeries recon = reconstruct_series(*model, gt);
                    const VelocityCurves truth = velocity_curves(gt);
                    const VelocityCurves pred = velocity_curves(
                        recon.series, opts.gt_masks_for_velocity ? gt.mask : recon.masks);
                    scores.velocity_coefficients.push_back(velocity_coefficient(pred, truth));
                } catch (const std::exception& e) {
                    scores.failures.push_back(gt.subject_id + "/" + gt.slice_id +
                                              " velocity: " + e.what());
                }
            }
        }
        report.methods.push_back(std::move(scores));
    }

    report.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

ExperimentReport run_ablations(const TrainConfig& base) {
    ExperimentReport report;
    const auto t0 = std::chrono::steady_clock::now();
    report.seed = base.seed;
    report.config_hash = hash_string(train_config_to_json(base));

    const DatasetSplit split = load_split(base.split_path);
    Dataset test = load_dataset(split.test);
    report.dataset_hash = test.hash;

    using net::AblationRow;
    const std::array<std::pair<AblationRow, const char*>, 4> rows = {
        std::pair{AblationRow::sep_no_shared, "sep_no_shared"},
        std::pair{AblationRow::shared_no_independent, "shared_no_independent"},
        std::pair{AblationRow::no_weighted_loss, "no_weighted_loss"},
        std::pair{AblationRow::full, "full"}};

    for (const auto& [row, name] : rows) {
        const net::AblationSetup setup = net::configure_ablation(row, base.net.base_channels);
        TrainConfig cfg = base;
        cfg.net = setup.net;
        cfg.loss.weighted = setup.weighted_loss;
        cfg.checkpoint_dir =
            base.checkpoint_dir.empty() ? "" : base.checkpoint_dir + "/ablation_" + name;
        std::cout << "== ablation row: " << name << " (" << setup.label << ")" << std::endl;
        TrainResult trained = train(cfg);

        EvaluateOptions opts;
        opts.methods = {"model"};
        opts.threads = base.threads;
        ExperimentReport row_report = evaluate(trained.model.get(), test, opts);

        AblationRowResult r;
        r.row = name;
        r.net = setup.net;
        r.weighted_loss = setup.weighted_loss;
        const auto agg = row_report.methods[0].metrics.aggregates();
        r.magnitude_psnr = agg.at("magnitude_psnr").mean;
        r.phase_psnr = agg.at("phase_psnr").mean;
        r.dice = agg.at("dice").mean;
        r.velocity_coefficient = aggregate(row_report.methods[0].velocity_coefficients).mean;
        report.ablation.push_back(r);
    }
    report.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

namespace {

std::string format_cell(double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(3) << v;
    return ss.str();
}

}  // namespace

std::string render_method_table(const ExperimentReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(24) << "Method";
    for (const char* col : {"Mag MAE", "Mag PSNR", "Mag SSIM", "Ph MAE", "Ph PSNR", "Ph SSIM",
                            "Dice", "VelCoef"})
        out << std::right << std::setw(10) << col;
    out << "\n" << std::string(24 + 8 * 10, '-') << "\n";
    for (const MethodScores& m : report.methods) {
        const auto agg = m.metrics.aggregates();
        auto get = [&](const char* k) {
            auto it = agg.find(k);
            return it == agg.end() ? std::string("-") : format_cell(it->second.mean);
        };
        out << std::left << std::setw(24) << m.method;
        out << std::right << std::setw(10) << get("magnitude_mae") << std::setw(10)
            << get("magnitude_psnr") << std::setw(10) << get("magnitude_ssim") << std::setw(10)
            << get("phase_mae") << std::setw(10) << get("phase_psnr") << std::setw(10)
            << get("phase_ssim") << std::setw(10) << get("dice") << std::setw(10)
            << (m.velocity_coefficients.empty()
                    ? std::string("-")
                    : format_cell(aggregate(m.velocity_coefficients).mean));
        out << "\n";
    }
    return out.str();
}

std::string render_ablation_table(const ExperimentReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(24) << "Row";
    for (const char* col : {"IndEnc", "IndDec", "Shared", "WLoss", "Mag PSNR", "Ph PSNR", "Dice",
                            "VelCoef"})
        out << std::right << std::setw(10) << col;
    out << "\n" << std::string(24 + 8 * 10, '-') << "\n";
    for (const AblationRowResult& r : report.ablation) {
        out << std::left << std::setw(24) << r.row;
        auto mark = [](bool b) { return b ? "yes" : "no"; };
        out << std::right << std::setw(10) << mark(r.net.independent_encoders) << std::setw(10)
            << mark(r.net.independent_decoders) << std::setw(10) << mark(r.net.shared_bottleneck)
            << std::setw(10) << mark(r.weighted_loss) << std::setw(10) << format_cell(r.magnitude_psnr)
            << std::setw(10) << format_cell(r.phase_psnr) << std::setw(10) << format_cell(r.dice)
            << std::setw(10) << format_cell(r.velocity_coefficient) << "\n";
    }
    return out.str();
}

void save_report_json(const ExperimentReport& report, const std::filesystem::path& path) {
    json j;
    j["wall_clock_sec"] = report.wall_clock_sec;
    j["config_hash"] = report.config_hash;
    j["dataset_hash"] = report.dataset_hash;
    j["seed"] = report.seed;
    j["methods"] = json::array();
    for (const MethodScores& m : report.methods) {
        json jm;
        jm["method"] = m.method;
        jm["per_sample"] = m.metrics.per_sample;
        json agg = json::object();
        for (const auto& [k, a] : m.metrics.aggregates())
            agg[k] = {{"mean", a.mean}, {"stddev", a.stddev}, {"count", a.count}};
        jm["aggregates"] = agg;
        jm["velocity_coefficients"] = m.velocity_coefficients;
        jm["failures"] = m.failures;
        j["methods"].push_back(jm);
    }
    j["ablation"] = json::array();
    for (const AblationRowResult& r : report.ablation) {
        j["ablation"].push_back(json{{"row", r.row},
                                     {"net", net_config_to_json(r.net)},
                                     {"weighted_loss", r.weighted_loss},
                                     {"magnitude_psnr", r.magnitude_psnr},
                                     {"phase_psnr", r.phase_psnr},
                                     {"dice", r.dice},
                                     {"velocity_coefficient", r.velocity_coefficient}});
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
}

ExperimentReport load_report_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("missing report: " + path.string());
    json j = json::parse(in);
    ExperimentReport report;
    report.wall_clock_sec = j.value("wall_clock_sec", 0.0);
    report.config_hash = j.value("config_hash", "");
    report.dataset_hash = j.value("dataset_hash", "");
    report.seed = j.value("seed", uint64_t(0));
    for (const auto& jm : j.value("methods", json::array())) {
        MethodScores m;
        m.method = jm.at("method").get<std::string>();
        for (const auto& [k, v] : jm.at("per_sample").items())
            m.metrics.per_sample[k] = v.get<std::vector<double>>();
        m.velocity_coefficients = jm.value("velocity_coefficients", std::vector<double>{});
        m.failures = jm.value("failures", std::vector<std::string>{});
        report.methods.push_back(std::move(m));
    }
    for (const auto& jr : j.value("ablation", json::array())) {
        AblationRowResult r;
        r.row = jr.at("row").get<std::string>();
        net_config_from_json(jr.at("net"), r.net);
        r.weighted_loss = jr.at("weighted_loss").get<bool>();
        r.magnitude_psnr = jr.at("magnitude_psnr").get<double>();
        r.phase_psnr = jr.at("phase_psnr").get<double>();
        r.dice = jr.at("dice").get<double>();
        r.velocity_coefficient = jr.at("velocity_coefficient").get<double>();
        report.ablation.push_back(r);
    }
    return report;
}

std::string hash_string(const std::string& text) { return sha256_hex(text.data(), text.size()); }

}  // namespace mvm
