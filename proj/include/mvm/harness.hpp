#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mvm/flow.hpp"
#include "mvm/losses.hpp"
#include "mvm/metrics.hpp"
#include "mvm/net/adam.hpp"
#include "mvm/net/checkpoint.hpp"
#include "mvm/net/unet.hpp"
#include "mvm/phantom.hpp"
#include "mvm/velocity.hpp"

namespace mvm {

struct TrainConfig {
    double learning_rate = 0.001;
    int batch_size = 8;           // full-scale profile uses 32; desk-scale 8
    int epochs = 4;
    int max_steps = 0;            // 0 = epochs only
    uint64_t seed = 1;
    net::NetworkConfig net;
    LossConfig loss;
    std::string split_path;       // split.json with train/val/test archive dirs
    std::string checkpoint_dir = "checkpoints";
    int eval_every = 100;         // steps between validation evaluations
    int early_stop_patience = 10; // evaluations without improvement; 0 = off
    int threads = 0;              // 0 = MVM_THREADS env or hardware
    int log_every = 10;
};

void validate_train_config(const TrainConfig& cfg);

TrainConfig train_config_from_json_file(const std::filesystem::path& path);
std::string train_config_to_json(const TrainConfig& cfg);

/// Effective worker count: explicit > MVM_THREADS env > hardware.
int resolve_threads(int requested);

/// In-memory dataset: loaded series plus the flat sample index.
struct Dataset {
    std::vector<MVMSeries> series;
    std::vector<std::tuple<int, int, int>> samples;  // (series index, tau, k)
    std::string hash;                                // over archive manifests
};

Dataset load_dataset(const std::vector<std::string>& archive_dirs);

struct TrainResult {
    std::unique_ptr<net::MTAttentionUNet<float>> model;  // best-validation parameters
    net::CheckpointMeta meta;
    std::vector<double> train_loss;  // per logged step
    std::vector<double> val_loss;    // per evaluation
};

/// Minibatch gradient descent on the total loss; deterministic given the
/// seed. Writes periodic checkpoints under cfg.checkpoint_dir and returns
/// the best-validation parameters. Throws NumericError (with a diagnostic
/// dump of the offending batch) when the loss turns NaN.
TrainResult train(const TrainConfig& cfg);

struct MethodScores {
    std::string method;  // "linear", "hs_flow", "model"
    MetricReport metrics;
    std::vector<double> velocity_coefficients;  // per test series (model only)
    std::vector<std::string> failures;
};

struct AblationRowResult {
    std::string row;
    net::NetworkConfig net;
    bool weighted_loss = true;
    double magnitude_psnr = 0;
    double phase_psnr = 0;
    double dice = 0;
    double velocity_coefficient = 0;
};

struct ExperimentReport {
    std::vector<MethodScores> methods;
    std::vector<AblationRowResult> ablation;
    double wall_clock_sec = 0;
    std::string config_hash;
    std::string dataset_hash;
    uint64_t seed = 0;
};

struct EvaluateOptions {
    std::set<std::string> methods = {"linear", "hs_flow", "model"};
    bool gt_masks_for_velocity = false;  // isolate synthesis from segmentation
    HSConfig hs;
    int threads = 0;
};

/// Scores every sample of every test series; model rows need a network.
ExperimentReport evaluate(net::MTAttentionUNet<float>* model, const Dataset& test,
                          const EvaluateOptions& opts);

/// Ground-truth anchors at multiples of 4 with synthesized frames in
/// between; tail frames with no bracketing anchor pair stay ground truth.
struct ReconstructedSeries {
    MVMSeries series;               // phase/magnitude with predictions inserted
    std::vector<ImageF> masks;      // predicted on synthesized frames, gt on anchors
    std::vector<bool> synthesized;  // per frame
};
ReconstructedSeries reconstruct_series(net::MTAttentionUNet<float>& model, const MVMSeries& gt);

/// Trains the four Table-2 rows with identical seed/data and scores each.
ExperimentReport run_ablations(const TrainConfig& base);

/// Renders the comparison (Table-1 shaped) and ablation (Table-2 shaped)
/// tables.
std::string render_method_table(const ExperimentReport& report);
std::string render_ablation_table(const ExperimentReport& report);

void save_report_json(const ExperimentReport& report, const std::filesystem::path& path);
ExperimentReport load_report_json(const std::filesystem::path& path);

/// Writes the figure panel set for one series: magnitude strip, contour
/// overlay, phase triptych, velocity-curve plot. Returns the written paths.
std::vector<std::filesystem::path> emit_figures(net::MTAttentionUNet<float>& model,
                                                const MVMSeries& series,
                                                const std::filesystem::path& out_dir);

/// One PNG per direction: `truth` (and `pred` when given) as line plots.
std::vector<std::filesystem::path> write_velocity_plots(const VelocityCurves& truth,
                                                        const VelocityCurves* pred,
                                                        const std::filesystem::path& out_dir);

/// sha256 over a canonical JSON rendering (config provenance).
std::string hash_string(const std::string& text);

}  // namespace mvm
