#pragma once

#include "hyperenergy/evaluation.hpp"
#include "hyperenergy/model.hpp"
#include "hyperenergy/training.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hyperenergy {

/// Cartesian hyperparameter space. Defaults cover the full sweep range for
/// this model family: 3 hidden sizes x 3 optimizers x 2 losses x 4 degrees
/// x 5 gammas x 2 activations = 720 combinations.
struct GridSpace {
    std::vector<std::size_t> hidden_units = {64, 128, 256};
    std::vector<OptimizerKind> optimizers = {OptimizerKind::adam, OptimizerKind::sgd,
                                             OptimizerKind::adamw};
    std::vector<LossKind> losses = {LossKind::mae, LossKind::mse};
    std::vector<int> degrees = {2, 3, 4, 5};
    std::vector<double> gammas = {2, 5, 6, 8, 10};
    std::vector<Activation> activations = {Activation::relu, Activation::swish};

    std::size_t size() const {
        return hidden_units.size() * optimizers.size() * losses.size() * degrees.size() *
               gammas.size() * activations.size();
    }
};

struct GridCombo {
    std::size_t index = 0; // enumeration order, the final tie-break
    std::size_t hidden_units = 0;
    OptimizerKind optimizer = OptimizerKind::adam;
    LossKind loss = LossKind::mae;
    int degree = 2;
    double gamma = 2.0;
    Activation activation = Activation::swish;
};

/// Deterministic enumeration order: hidden x optimizer x loss x degree x
/// gamma x activation, last axis fastest.
std::vector<GridCombo> enumerate_grid(const GridSpace& space);

struct GridRunResult {
    GridCombo combo;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double best_val_loss = 0.0;
    double val_mae = 0.0;
    double val_rmse = 0.0;
    double val_smape = 0.0;
    std::size_t epochs_run = 0;
    std::string stop_reason;
};

struct GridSearchReport {
    std::vector<GridRunResult> results; // enumeration order
    /// Indices into results, ranked by validation SMAPE ascending; ties break
    /// on validation MAE, then enumeration order. Failed runs sort last.
    std::vector<std::size_t> ranking;
};

std::vector<std::size_t> rank_results(const std::vector<GridRunResult>& results);

/// Trains one model per combination and ranks them. progress_csv, when
/// non-empty, is an append-only journal: rows already present are not rerun,
/// which makes an interrupted search resumable.
GridSearchReport grid_search(const DatasetBundle& data, const ModelConfig& base_model,
                             ModelVariant variant, const TrainConfig& base_train,
                             const GridSpace& space, std::size_t jobs = 1,
                             const std::string& progress_csv = "",
                             const std::string& header_comment = "");

void write_grid_results_csv(const std::string& path, const GridSearchReport& report,
                            const std::string& header_comment);

} // namespace hyperenergy
