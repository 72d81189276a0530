#include "hyperenergy/grid_search.hpp"

#include "hyperenergy/errors.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace hyperenergy {

std::vector<GridCombo> enumerate_grid(const GridSpace& space) {
    if (space.size() == 0) throw ConfigError("grid space is empty");
    std::vector<GridCombo> combos;
    combos.reserve(space.size());
    std::size_t index = 0;
    for (std::size_t hu : space.hidden_units) {
        for (OptimizerKind opt : space.optimizers) {
            for (LossKind l : space.losses) {
                for (int d : space.degrees) {
                    for (double g : space.gammas) {
                        for (Activation a : space.activations) {
                            GridCombo combo;
                            combo.index = index++;
                            combo.hidden_units = hu;
                            combo.optimizer = opt;
                            combo.loss = l;
                            combo.degree = d;
                            combo.gamma = g;
                            combo.activation = a;
                            combos.push_back(combo);
                        }
                    }
                }
            }
        }
    }
    return combos;
}

std::vector<std::size_t> rank_results(const std::vector<GridRunResult>& results) {
    std::vector<std::size_t> order(results.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const GridRunResult& ra = results[a];
        const GridRunResult& rb = results[b];
        if (ra.ok != rb.ok) return ra.ok; // failures last
        if (!ra.ok) return ra.combo.index < rb.combo.index;
        if (ra.val_smape != rb.val_smape) return ra.val_smape < rb.val_smape;
        if (ra.val_mae != rb.val_mae) return ra.val_mae < rb.val_mae;
        return ra.combo.index < rb.combo.index;
    });
    return order;
}

namespace {

std::string result_to_row(const GridRunResult& r) {
    std::ostringstream os;
    os.precision(17);
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << r.combo.index << "," << r.combo.hidden_units << ","
       << optimizer_name(r.combo.optimizer) << "," << loss_name(r.combo.loss) << ","
       << r.combo.degree << "," << r.combo.gamma << "," << activation_name(r.combo.activation)
       << "," << r.seed << "," << (r.ok ? "ok" : "failed") << "," << err << ","
       << r.best_val_loss << "," << r.val_mae << "," << r.val_rmse << "," << r.val_smape
       << "," << r.epochs_run << "," << r.stop_reason;
    return os.str();
}

constexpr const char* kGridHeader =
    "combo,hidden_units,optimizer,loss,degree,gamma,activation,seed,status,error,"
    "best_val_loss,val_mae,val_rmse,val_smape,epochs_run,stop_reason";

/// Parses a journal row back into a result; returns false on malformed rows.
bool row_to_result(const std::string& line, GridRunResult& out) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    if (fields.size() != 16) return false;
    try {
        out.combo.index = std::stoull(fields[0]);
        out.combo.hidden_units = std::stoull(fields[1]);
        out.combo.optimizer = optimizer_from_name(fields[2]);
        out.combo.loss = loss_from_name(fields[3]);
        out.combo.degree = std::stoi(fields[4]);
        out.combo.gamma = std::stod(fields[5]);
        out.combo.activation = activation_from_name(fields[6]);
        out.seed = std::stoull(fields[7]);
        out.ok = fields[8] == "ok";
        out.error = fields[9];
        out.best_val_loss = std::stod(fields[10]);
        out.val_mae = std::stod(fields[11]);
        out.val_rmse = std::stod(fields[12]);
        out.val_smape = std::stod(fields[13]);
        out.epochs_run = std::stoull(fields[14]);
        out.stop_reason = fields[15];
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

} // namespace

GridSearchReport grid_search(const DatasetBundle& data, const ModelConfig& base_model,
                             ModelVariant variant, const TrainConfig& base_train,
                             const GridSpace& space, std::size_t jobs,
                             const std::string& progress_csv,
                             const std::string& header_comment) {
    const std::vector<GridCombo> combos = enumerate_grid(space);

    GridSearchReport report;
    report.results.resize(combos.size());
    std::vector<bool> done(combos.size(), false);

    // Resume: absorb completed rows from the journal.
    if (!progress_csv.empty() && std::filesystem::exists(progress_csv)) {
        std::ifstream in(progress_csv);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("combo,", 0) == 0) continue;
            GridRunResult parsed;
            if (row_to_result(line, parsed) && parsed.combo.index < combos.size()) {
                report.results[parsed.combo.index] = parsed;
                done[parsed.combo.index] = true;
            }
        }
    }

    std::mutex journal_mutex;
    std::ofstream journal;
    if (!progress_csv.empty()) {
        const bool fresh = !std::filesystem::exists(progress_csv) ||
                           std::filesystem::file_size(progress_csv) == 0;
        journal.open(progress_csv, std::ios::app);
        if (!journal) throw IoError("cannot open grid journal '" + progress_csv + "'");
        if (fresh) {
            if (!header_comment.empty()) journal << "# " << header_comment << "\n";
            journal << kGridHeader << "\n";
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= combos.size()) break;
            if (done[i]) continue;
            const GridCombo& combo = combos[i];
            GridRunResult res;
            res.combo = combo;
            res.seed = base_train.seed;
            try {
                ModelConfig mc = base_model;
                mc.hidden_units = combo.hidden_units;
                mc.degree = combo.degree;
                mc.gamma = combo.gamma;
                mc.activation = combo.activation;
                TrainConfig tc = base_train;
                tc.optimizer = combo.optimizer;
                tc.loss = combo.loss;
                auto model =
                    build_variant(variant, mc, base_train.seed, &data.train.inputs);
                TrainHistory hist = train(*model, data.train, data.val, tc);
                MetricsReport val_metrics = evaluate(*model, data.val, data.scaler);
                res.best_val_loss = hist.best_val_loss;
                res.val_mae = val_metrics.mae;
                res.val_rmse = val_metrics.rmse;
                res.val_smape = val_metrics.smape;
                res.epochs_run = hist.epochs.size();
                res.stop_reason = hist.stop_reason;
                res.ok = true;
            } catch (const std::exception& e) {
                res.ok = false;
                res.error = e.what();
            }
            report.results[i] = res;
            if (journal.is_open()) {
                std::lock_guard<std::mutex> lock(journal_mutex);
                journal << result_to_row(res) << "\n";
                journal.flush();
            }
        }
    };

    const std::size_t worker_count = std::max<std::size_t>(1, std::min(jobs, combos.size()));
    if (worker_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < worker_count; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    report.ranking = rank_results(report.results);
    return report;
}

void write_grid_results_csv(const std::string& path, const GridSearchReport& report,
                            const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write CSV file '" + path + "'");
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    out << "rank," << kGridHeader << "\n";
    out.precision(17);
    for (std::size_t rank = 0; rank < report.ranking.size(); ++rank) {
        out << (rank + 1) << "," << result_to_row(report.results[report.ranking[rank]])
            << "\n";
    }
    if (!out) throw IoError("failed writing CSV file '" + path + "'");
}

} // namespace hyperenergy
