#pragma once

#include "hyperenergy/data.hpp"
#include "hyperenergy/grad_check.hpp"
#include "hyperenergy/model.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace hyperenergy {

enum class LossKind { mae, mse };
enum class OptimizerKind { sgd, adam, adamw };

std::string loss_name(LossKind k);
LossKind loss_from_name(const std::string& name);
std::string optimizer_name(OptimizerKind k);
OptimizerKind optimizer_from_name(const std::string& name);

/// MSE: mean of squared errors over all B*h entries; MAE: mean of absolute
/// errors, with subgradient 0 at an exact zero residual.
Tensor loss(const Tensor& pred, const Tensor& target, LossKind kind);

struct PlateauSchedule {
    double factor = 0.5;
    std::size_t patience = 3;
    double min_lr = 1e-6;
    double threshold = 1e-8; // required improvement over the best seen loss
};

struct TrainConfig {
    LossKind loss = LossKind::mae;
    OptimizerKind optimizer = OptimizerKind::adam;
    double learning_rate = -1.0; // < 0 -> optimizer default (1e-3 Adam/AdamW, 1e-2 SGD)
    std::size_t batch_size = 32;
    std::size_t max_epochs = 300;
    std::size_t early_stop_patience = 5;
    PlateauSchedule plateau;
    double weight_decay = 0.01; // AdamW only
    std::uint64_t seed = 0;

    double effective_lr() const;
};

/// SGD / Adam / AdamW over a fixed parameter list. Throws NumericalError,
/// naming the parameter, when a non-finite gradient is encountered.
class Optimizer {
public:
    struct State {
        std::vector<std::vector<double>> m;
        std::vector<std::vector<double>> v;
        std::int64_t step_count = 0;
    };

    Optimizer(OptimizerKind kind, std::vector<NamedParam> params, double lr,
              double weight_decay = 0.01);

    void step();
    void zero_grad();
    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    OptimizerKind kind() const { return kind_; }
    const std::vector<NamedParam>& params() const { return params_; }

    State state() const;
    void restore_state(const State& state);

private:
    OptimizerKind kind_;
    std::vector<NamedParam> params_;
    double lr_;
    double weight_decay_;
    State state_;
};

/// Strict-improvement early stopping: stop after `patience` consecutive
/// epochs whose validation loss fails to beat the best seen so far.
class EarlyStopping {
public:
    explicit EarlyStopping(std::size_t patience);

    /// Returns true when training should stop after this epoch.
    bool observe(double val_loss);

    bool improved_last() const { return improved_last_; }
    double best() const { return best_; }
    std::size_t best_index() const { return best_index_; } // 1-based observe count
    std::size_t stale() const { return stale_; }
    void restore(double best, std::size_t best_index, std::size_t stale);

private:
    std::size_t patience_;
    double best_ = std::numeric_limits<double>::infinity();
    std::size_t best_index_ = 0;
    std::size_t stale_ = 0;
    std::size_t observed_ = 0;
    bool improved_last_ = false;
};

/// Validation-loss plateau policy: when the best loss fails to improve by
/// more than `threshold` for `patience` consecutive epochs, the rate is
/// multiplied by `factor` (floored at min_lr) and the stagnation counter
/// resets.
class PlateauScheduler {
public:
    PlateauScheduler(PlateauSchedule schedule, double initial_lr);

    double observe(double val_loss); // returns the rate to use next

    double current_lr() const { return lr_; }
    double best_loss() const { return best_; }
    std::size_t stale_epochs() const { return stale_; }
    void restore(double lr, double best, std::size_t stale);

private:
    PlateauSchedule schedule_;
    double lr_;
    double best_ = std::numeric_limits<double>::infinity();
    std::size_t stale_ = 0;
};

struct EpochRecord {
    std::size_t epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_smape = 0.0;
    double learning_rate = 0.0;
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::string stop_reason; // "early_stop" | "max_epochs"
    std::size_t best_epoch = 0; // 1-based
    double best_val_loss = std::numeric_limits<double>::infinity();
};

/// Everything needed to continue an interrupted run with a trajectory
/// identical to an uninterrupted one.
struct TrainSession {
    std::size_t epochs_completed = 0;
    double lr = 0.0;
    double best_val_loss = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    std::size_t stale_epochs = 0;          // early-stopping counter
    double plateau_best = std::numeric_limits<double>::infinity();
    std::size_t plateau_stale = 0;
    bool stopped = false;
    Optimizer::State opt_state;
    std::vector<std::vector<double>> current_params;
    std::vector<std::vector<double>> best_params;
    TrainHistory history;
};

/// Mini-batch loop with seeded per-epoch shuffles, plateau scheduling and
/// early stopping. On return the model carries the best-validation-epoch
/// parameters. When a session with progress is supplied, training resumes
/// after its last completed epoch.
TrainHistory train(ForecastModel& model, const WindowedDataset& train_set,
                   const WindowedDataset& val_set, const TrainConfig& config,
                   TrainSession* session = nullptr);

/// Gathers dataset rows into batch tensors (leaves, no gradient).
Tensor gather_windows(const WindowedDataset& ds, std::span<const std::size_t> rows);
Tensor gather_targets(const WindowedDataset& ds, std::span<const std::size_t> rows);

/// Forward pass over a whole dataset without recording the tape; returns the
/// [M x h] prediction matrix (scaled space).
std::vector<double> predict_all(ForecastModel& model, const WindowedDataset& ds,
                                std::size_t batch_size = 256);

} // namespace hyperenergy
