#include "hyperenergy/training.hpp"

#include "hyperenergy/errors.hpp"
#include "hyperenergy/evaluation.hpp"
#include "hyperenergy/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace hyperenergy {

std::string loss_name(LossKind k) { return k == LossKind::mae ? "mae" : "mse"; }

LossKind loss_from_name(const std::string& name) {
    if (name == "mae") return LossKind::mae;
    if (name == "mse") return LossKind::mse;
    throw ConfigError("unknown loss '" + name + "'");
}

std::string optimizer_name(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::sgd: return "sgd";
        case OptimizerKind::adam: return "adam";
        case OptimizerKind::adamw: return "adamw";
    }
    return "adam";
}

OptimizerKind optimizer_from_name(const std::string& name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adam") return OptimizerKind::adam;
    if (name == "adamw") return OptimizerKind::adamw;
    throw ConfigError("unknown optimizer '" + name + "'");
}

Tensor loss(const Tensor& pred, const Tensor& target, LossKind kind) {
    if (pred.shape() != target.shape()) {
        throw ShapeError("loss: prediction " + shape_str(pred.shape()) +
                         " does not match target " + shape_str(target.shape()));
    }
    Tensor residual = sub(pred, target);
    if (kind == LossKind::mse) {
        return mean(mul(residual, residual));
    }
    // |r| = relu(r) + relu(-r); both relu subgradients vanish at 0, so the
    // MAE subgradient at an exact zero residual is 0.
    Tensor abs_residual = add(relu(residual), relu(scalar_mul(residual, -1.0)));
    return mean(abs_residual);
}

double TrainConfig::effective_lr() const {
    if (learning_rate >= 0.0) return learning_rate;
    return optimizer == OptimizerKind::sgd ? 1e-2 : 1e-3;
}

// ---- early stopping ---------------------------------------------------------------

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
    if (patience_ == 0) throw ConfigError("early stopping patience must be >= 1");
}

bool EarlyStopping::observe(double val_loss) {
    ++observed_;
    if (val_loss < best_) {
        best_ = val_loss;
        best_index_ = observed_;
        stale_ = 0;
        improved_last_ = true;
        return false;
    }
    improved_last_ = false;
    ++stale_;
    return stale_ >= patience_;
}

void EarlyStopping::restore(double best, std::size_t best_index, std::size_t stale) {
    best_ = best;
    best_index_ = best_index;
    stale_ = stale;
    observed_ = best_index + stale;
}

// ---- optimizer ------------------------------------------------------------------

Optimizer::Optimizer(OptimizerKind kind, std::vector<NamedParam> params, double lr,
                     double weight_decay)
    : kind_(kind), params_(std::move(params)), lr_(lr), weight_decay_(weight_decay) {
    if (lr_ < 0.0) throw ConfigError("optimizer learning rate must be >= 0");
    if (kind_ != OptimizerKind::sgd) {
        state_.m.resize(params_.size());
        state_.v.resize(params_.size());
        for (std::size_t i = 0; i < params_.size(); ++i) {
            state_.m[i].assign(params_[i].tensor.size(), 0.0);
            state_.v[i].assign(params_[i].tensor.size(), 0.0);
        }
    }
}

void Optimizer::zero_grad() {
    for (NamedParam& p : params_) p.tensor.zero_grad();
}

void Optimizer::step() {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;

    ++state_.step_count;
    const double t = static_cast<double>(state_.step_count);
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);

    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        NamedParam& p = params_[pi];
        if (!p.tensor.has_grad()) continue; // never reached by backward: no update
        auto g = p.tensor.grad();
        auto v = p.tensor.values();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!std::isfinite(g[i])) {
                throw NumericalError("non-finite gradient in parameter '" + p.name + "'");
            }
        }
        switch (kind_) {
            case OptimizerKind::sgd:
                for (std::size_t i = 0; i < g.size(); ++i) v[i] -= lr_ * g[i];
                break;
            case OptimizerKind::adam:
            case OptimizerKind::adamw: {
                auto& m = state_.m[pi];
                auto& vv = state_.v[pi];
                for (std::size_t i = 0; i < g.size(); ++i) {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                    vv[i] = beta2 * vv[i] + (1.0 - beta2) * g[i] * g[i];
                    const double m_hat = m[i] / bc1;
                    const double v_hat = vv[i] / bc2;
                    double update = m_hat / (std::sqrt(v_hat) + eps);
                    if (kind_ == OptimizerKind::adamw) update += weight_decay_ * v[i];
                    v[i] -= lr_ * update;
                }
                break;
            }
        }
    }
}

Optimizer::State Optimizer::state() const { return state_; }

void Optimizer::restore_state(const State& state) {
    if (kind_ != OptimizerKind::sgd) {
        if (state.m.size() != params_.size() || state.v.size() != params_.size()) {
            throw ShapeError("optimizer state does not match parameter count");
        }
    }
    state_ = state;
}

// ---- plateau scheduler ---------------------------------------------------------------

PlateauScheduler::PlateauScheduler(PlateauSchedule schedule, double initial_lr)
    : schedule_(schedule), lr_(initial_lr) {}

double PlateauScheduler::observe(double val_loss) {
    if (val_loss < best_ - schedule_.threshold) {
        best_ = val_loss;
        stale_ = 0;
        return lr_;
    }
    ++stale_;
    if (stale_ >= schedule_.patience) {
        lr_ = std::max(lr_ * schedule_.factor, schedule_.min_lr);
        stale_ = 0;
    }
    return lr_;
}

void PlateauScheduler::restore(double lr, double best, std::size_t stale) {
    lr_ = lr;
    best_ = best;
    stale_ = stale;
}

// ---- batching -------------------------------------------------------------------------

Tensor gather_windows(const WindowedDataset& ds, std::span<const std::size_t> rows) {
    const std::size_t n = ds.window_length;
    const std::size_t k = ds.inputs.dim(2);
    const std::size_t stride = n * k;
    std::vector<double> values;
    values.reserve(rows.size() * stride);
    auto src = ds.inputs.values();
    for (std::size_t r : rows) {
        values.insert(values.end(), src.begin() + static_cast<std::ptrdiff_t>(r * stride),
                      src.begin() + static_cast<std::ptrdiff_t>((r + 1) * stride));
    }
    return Tensor::from_values({rows.size(), n, k}, std::move(values));
}

Tensor gather_targets(const WindowedDataset& ds, std::span<const std::size_t> rows) {
    const std::size_t h = ds.horizon;
    std::vector<double> values;
    values.reserve(rows.size() * h);
    auto src = ds.targets.values();
    for (std::size_t r : rows) {
        values.insert(values.end(), src.begin() + static_cast<std::ptrdiff_t>(r * h),
                      src.begin() + static_cast<std::ptrdiff_t>((r + 1) * h));
    }
    return Tensor::from_values({rows.size(), h}, std::move(values));
}

std::vector<double> predict_all(ForecastModel& model, const WindowedDataset& ds,
                                std::size_t batch_size) {
    NoGradGuard guard;
    const std::size_t M = ds.size();
    const std::size_t h = ds.horizon;
    std::vector<double> out;
    out.reserve(M * h);
    std::vector<std::size_t> rows;
    for (std::size_t begin = 0; begin < M; begin += batch_size) {
        const std::size_t end = std::min(M, begin + batch_size);
        rows.resize(end - begin);
        std::iota(rows.begin(), rows.end(), begin);
        Tensor pred = model.forward(gather_windows(ds, rows));
        auto v = pred.values();
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

// ---- train loop -------------------------------------------------------------------------

namespace {

double dataset_loss(ForecastModel& model, const WindowedDataset& ds, LossKind kind,
                    std::size_t batch_size) {
    NoGradGuard guard;
    const std::size_t M = ds.size();
    double total = 0.0;
    std::vector<std::size_t> rows;
    for (std::size_t begin = 0; begin < M; begin += batch_size) {
        const std::size_t end = std::min(M, begin + batch_size);
        rows.resize(end - begin);
        std::iota(rows.begin(), rows.end(), begin);
        Tensor pred = model.forward(gather_windows(ds, rows));
        Tensor l = loss(pred, gather_targets(ds, rows), kind);
        total += l.item() * static_cast<double>(end - begin);
    }
    return total / static_cast<double>(M);
}

double validation_smape(ForecastModel& model, const WindowedDataset& ds,
                        std::size_t batch_size) {
    std::vector<double> pred = predict_all(model, ds, batch_size);
    auto target = ds.targets.values();
    std::vector<double> pred_kwh(pred.size()), target_kwh(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pred_kwh[i] = ds.scaler.invert_value(pred[i], ds.consumption_column);
        target_kwh[i] = ds.scaler.invert_value(target[i], ds.consumption_column);
    }
    return metric_smape(target_kwh, pred_kwh);
}

} // namespace

TrainHistory train(ForecastModel& model, const WindowedDataset& train_set,
                   const WindowedDataset& val_set, const TrainConfig& config,
                   TrainSession* session) {
    if (train_set.size() == 0 || val_set.size() == 0) {
        throw DataError("training requires non-empty train and validation datasets");
    }
    if (config.max_epochs == 0 || config.early_stop_patience == 0) {
        throw ConfigError("max_epochs and early_stop_patience must be >= 1");
    }

    const double initial_lr = config.effective_lr();
    Optimizer opt(config.optimizer, model.trainable_params(), initial_lr,
                  config.weight_decay);
    PlateauScheduler scheduler(config.plateau, initial_lr);
    EarlyStopping stopper(config.early_stop_patience);

    TrainHistory history;
    std::vector<std::vector<double>> best_params = model.snapshot();
    std::size_t start_epoch = 0;
    bool stopped_early = false;

    if (session && session->epochs_completed > 0) {
        model.restore(session->current_params);
        opt.restore_state(session->opt_state);
        opt.set_lr(session->lr);
        scheduler.restore(session->lr, session->plateau_best, session->plateau_stale);
        stopper.restore(session->best_val_loss, session->best_epoch, session->stale_epochs);
        history = session->history;
        best_params = session->best_params;
        start_epoch = session->epochs_completed;
        stopped_early = session->stopped;
    }

    const std::size_t M = train_set.size();
    std::vector<std::size_t> order(M);

    for (std::size_t epoch = start_epoch; epoch < config.max_epochs && !stopped_early;
         ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();

        std::iota(order.begin(), order.end(), 0);
        auto shuffle_rng = make_rng(config.seed, "train.shuffle", epoch);
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double train_loss_sum = 0.0;
        for (std::size_t begin = 0; begin < M; begin += config.batch_size) {
            const std::size_t end = std::min(M, begin + config.batch_size);
            std::span<const std::size_t> rows(order.data() + begin, end - begin);
            Tensor pred = model.forward(gather_windows(train_set, rows));
            Tensor batch_loss = loss(pred, gather_targets(train_set, rows), config.loss);
            const double lv = batch_loss.item();
            if (!std::isfinite(lv)) {
                throw NumericalError("non-finite training loss at epoch " +
                                     std::to_string(epoch + 1) + ", batch " +
                                     std::to_string(begin / config.batch_size + 1));
            }
            train_loss_sum += lv * static_cast<double>(end - begin);
            opt.zero_grad();
            backward(batch_loss);
            opt.step();
        }

        const double train_loss = train_loss_sum / static_cast<double>(M);
        const double val_loss =
            dataset_loss(model, val_set, config.loss, config.batch_size);
        if (!std::isfinite(val_loss)) {
            throw NumericalError("non-finite validation loss at epoch " +
                                 std::to_string(epoch + 1));
        }
        const double val_smape = validation_smape(model, val_set, config.batch_size);
        const double next_lr = scheduler.observe(val_loss);
        opt.set_lr(next_lr);

        stopped_early = stopper.observe(val_loss);
        if (stopper.improved_last()) best_params = model.snapshot();

        const auto t1 = std::chrono::steady_clock::now();
        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.train_loss = train_loss;
        rec.val_loss = val_loss;
        rec.val_smape = val_smape;
        rec.learning_rate = next_lr;
        rec.seconds = std::chrono::duration<double>(t1 - t0).count();
        history.epochs.push_back(rec);

        if (session) {
            session->epochs_completed = epoch + 1;
            session->lr = next_lr;
            session->best_val_loss = stopper.best();
            session->best_epoch = stopper.best_index();
            session->stale_epochs = stopper.stale();
            session->plateau_best = scheduler.best_loss();
            session->plateau_stale = scheduler.stale_epochs();
            session->stopped = stopped_early;
            session->opt_state = opt.state();
            session->current_params = model.snapshot();
            session->best_params = best_params;
        }
    }

    history.stop_reason = stopped_early ? "early_stop" : "max_epochs";
    history.best_epoch = stopper.best_index();
    history.best_val_loss = stopper.best();
    model.restore(best_params);
    if (session) session->history = history;
    return history;
}

} // namespace hyperenergy
