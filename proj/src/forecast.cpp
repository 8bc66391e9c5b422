#include "lvsim/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace lvsim {
namespace {

// Uniform in [0, 1) built from raw engine output so results do not depend on
// library-specific distribution internals.
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string format_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

SupervisedWindowSet build_windows(const InstanceSeries& series, int window) {
    if (window <= 0) throw ValidationError("window length must be positive");
    const int len = static_cast<int>(series.counts.size());
    if (len < window + 1)
        throw SeriesTooShortError("series of length " + std::to_string(len) +
                                  " cannot produce a window of " + std::to_string(window) +
                                  " plus a target");
    SupervisedWindowSet out;
    out.window = window;
    const int rows = len - window;
    out.inputs.reserve(static_cast<std::size_t>(rows));
    out.targets.reserve(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i) {
        std::vector<double> x(static_cast<std::size_t>(window));
        for (int j = 0; j < window; ++j)
            x[static_cast<std::size_t>(j)] =
                static_cast<double>(series.counts[static_cast<std::size_t>(i + j)]);
        out.inputs.push_back(std::move(x));
        out.targets.push_back(
            static_cast<double>(series.counts[static_cast<std::size_t>(i + window)]));
    }
    return out;
}

std::pair<SupervisedWindowSet, SupervisedWindowSet> chronological_split(
    const SupervisedWindowSet& all, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("train fraction must lie strictly between 0 and 1");
    const std::size_t rows = all.rows();
    if (rows < 2) throw SeriesTooShortError("need at least two rows to split");
    std::size_t cut = static_cast<std::size_t>(
        std::floor(static_cast<double>(rows) * train_fraction));
    cut = std::clamp<std::size_t>(cut, 1, rows - 1);
    SupervisedWindowSet train, test;
    train.window = test.window = all.window;
    train.inputs.assign(all.inputs.begin(), all.inputs.begin() + static_cast<long>(cut));
    train.targets.assign(all.targets.begin(), all.targets.begin() + static_cast<long>(cut));
    test.inputs.assign(all.inputs.begin() + static_cast<long>(cut), all.inputs.end());
    test.targets.assign(all.targets.begin() + static_cast<long>(cut), all.targets.end());
    return {std::move(train), std::move(test)};
}

double r_squared(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size())
        throw ValidationError("actual/predicted length mismatch");
    if (actual.empty()) throw ValidationError("empty evaluation set");
    double mean = 0.0;
    for (double a : actual) mean += a;
    mean /= static_cast<double>(actual.size());
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ss_tot += (actual[i] - mean) * (actual[i] - mean);
        ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    }
    if (ss_tot == 0.0)
        throw DegenerateActualsError("actuals are constant, r-squared undefined");
    return 1.0 - ss_res / ss_tot;
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size())
        throw ValidationError("actual/predicted length mismatch");
    if (actual.empty()) throw ValidationError("empty evaluation set");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i)
        sum += std::abs(actual[i] - predicted[i]);
    return sum / static_cast<double>(actual.size());
}

// ---------------------------------------------------------------------------
// Seasonal repeat
// ---------------------------------------------------------------------------

SeasonalNaiveForecaster::SeasonalNaiveForecaster(int period) : period_(period) {
    if (period <= 0) throw ValidationError("season period must be positive");
}

void SeasonalNaiveForecaster::fit(const SupervisedWindowSet& train) {
    if (period_ > train.window)
        throw TrainingError("season period " + std::to_string(period_) +
                            " exceeds window " + std::to_string(train.window));
}

double SeasonalNaiveForecaster::predict(std::span<const double> window) const {
    if (static_cast<int>(window.size()) < period_)
        throw ValidationError("window shorter than the season period");
    return window[window.size() - static_cast<std::size_t>(period_)];
}

std::string SeasonalNaiveForecaster::name() const {
    return "seasonal_naive_" + std::to_string(period_);
}

// ---------------------------------------------------------------------------
// Ridge autoregression
// ---------------------------------------------------------------------------

RidgeArForecaster::RidgeArForecaster(double lambda) : lambda_(lambda) {
    if (lambda < 0) throw ValidationError("ridge penalty must be non-negative");
}

void RidgeArForecaster::fit(const SupervisedWindowSet& train) {
    const int k = train.window;
    const std::size_t m = train.rows();
    if (m == 0) throw TrainingError("no training rows");
    const int dim = k + 1;  // features plus an unpenalized intercept

    std::vector<double> A(static_cast<std::size_t>(dim) * dim, 0.0);
    std::vector<double> b(static_cast<std::size_t>(dim), 0.0);
    auto at = [&](int r, int c) -> double& {
        return A[static_cast<std::size_t>(r) * dim + c];
    };
    for (std::size_t row = 0; row < m; ++row) {
        const auto& x = train.inputs[row];
        const double y = train.targets[row];
        for (int i = 0; i < dim; ++i) {
            const double xi = (i < k) ? x[static_cast<std::size_t>(i)] : 1.0;
            b[static_cast<std::size_t>(i)] += xi * y;
            for (int j = i; j < dim; ++j) {
                const double xj = (j < k) ? x[static_cast<std::size_t>(j)] : 1.0;
                at(i, j) += xi * xj;
            }
        }
    }
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < i; ++j) at(i, j) = at(j, i);
    for (int i = 0; i < k; ++i) at(i, i) += lambda_;

    double scale = 0.0;
    for (double v : A) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) scale = 1.0;

    // Gaussian elimination with partial pivoting.
    std::vector<int> perm(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int col = 0; col < dim; ++col) {
        int pivot = col;
        for (int r = col + 1; r < dim; ++r)
            if (std::abs(at(r, col)) > std::abs(at(pivot, col))) pivot = r;
        if (std::abs(at(pivot, col)) < 1e-12 * scale)
            throw TrainingError("normal equations are singular; raise the ridge penalty");
        if (pivot != col) {
            for (int c = 0; c < dim; ++c) std::swap(at(pivot, c), at(col, c));
            std::swap(b[static_cast<std::size_t>(pivot)], b[static_cast<std::size_t>(col)]);
        }
        for (int r = col + 1; r < dim; ++r) {
            const double f = at(r, col) / at(col, col);
            if (f == 0.0) continue;
            for (int c = col; c < dim; ++c) at(r, c) -= f * at(col, c);
            b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    std::vector<double> sol(static_cast<std::size_t>(dim), 0.0);
    for (int r = dim - 1; r >= 0; --r) {
        double v = b[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < dim; ++c) v -= at(r, c) * sol[static_cast<std::size_t>(c)];
        sol[static_cast<std::size_t>(r)] = v / at(r, r);
    }
    beta_.assign(sol.begin(), sol.begin() + k);
    intercept_ = sol[static_cast<std::size_t>(k)];
    window_ = k;
}

double RidgeArForecaster::predict(std::span<const double> window) const {
    if (window_ < 0) throw TrainingError("ridge model used before fitting");
    if (static_cast<int>(window.size()) != window_)
        throw ValidationError("window length does not match the fitted model");
    double v = intercept_;
    for (std::size_t i = 0; i < window.size(); ++i) v += beta_[i] * window[i];
    return v;
}

std::string RidgeArForecaster::name() const { return "ridge_" + format_number(lambda_); }

// ---------------------------------------------------------------------------
// Single hidden layer network
// ---------------------------------------------------------------------------

MlpForecaster::MlpForecaster(MlpOptions opt) : opt_(opt) {
    if (opt.hidden <= 0 || opt.epochs <= 0 || opt.batch <= 0 || opt.learning_rate <= 0)
        throw ValidationError("network options must be positive");
}

void MlpForecaster::init_random(int window, std::uint64_t seed) {
    if (window <= 0) throw ValidationError("window length must be positive");
    window_ = window;
    const int h = opt_.hidden;
    w1_.assign(static_cast<std::size_t>(h) * window, 0.0);
    b1_.assign(static_cast<std::size_t>(h), 0.0);
    w2_.assign(static_cast<std::size_t>(h), 0.0);
    b2_ = 0.0;
    std::mt19937_64 rng(seed);
    const double a1 = std::sqrt(6.0 / static_cast<double>(window + h));
    for (double& w : w1_) w = (2.0 * unit_uniform(rng) - 1.0) * a1;
    const double a2 = std::sqrt(6.0 / static_cast<double>(h + 1));
    for (double& w : w2_) w = (2.0 * unit_uniform(rng) - 1.0) * a2;
    in_mean_.assign(static_cast<std::size_t>(window), 0.0);
    in_scale_.assign(static_cast<std::size_t>(window), 1.0);
    out_mean_ = 0.0;
    out_scale_ = 1.0;
    ready_ = true;
}

double MlpForecaster::forward_std(std::span<const double> x) const {
    const int h = opt_.hidden;
    double out = b2_;
    for (int u = 0; u < h; ++u) {
        double z = b1_[static_cast<std::size_t>(u)];
        const double* row = &w1_[static_cast<std::size_t>(u) * window_];
        for (int j = 0; j < window_; ++j) z += row[j] * x[static_cast<std::size_t>(j)];
        if (z > 0) out += w2_[static_cast<std::size_t>(u)] * z;
    }
    return out;
}

void MlpForecaster::fit(const SupervisedWindowSet& train) {
    const int k = train.window;
    const std::size_t m = train.rows();
    if (m == 0) throw TrainingError("no training rows");
    init_random(k, opt_.seed);

    // Standardize inputs and target with training statistics.
    in_mean_.assign(static_cast<std::size_t>(k), 0.0);
    in_scale_.assign(static_cast<std::size_t>(k), 0.0);
    for (const auto& x : train.inputs)
        for (int j = 0; j < k; ++j) in_mean_[static_cast<std::size_t>(j)] += x[static_cast<std::size_t>(j)];
    for (double& v : in_mean_) v /= static_cast<double>(m);
    for (const auto& x : train.inputs)
        for (int j = 0; j < k; ++j) {
            const double d = x[static_cast<std::size_t>(j)] - in_mean_[static_cast<std::size_t>(j)];
            in_scale_[static_cast<std::size_t>(j)] += d * d;
        }
    for (double& v : in_scale_) {
        v = std::sqrt(v / static_cast<double>(m));
        if (v < 1e-12) v = 1.0;
    }
    out_mean_ = 0.0;
    for (double y : train.targets) out_mean_ += y;
    out_mean_ /= static_cast<double>(m);
    out_scale_ = 0.0;
    for (double y : train.targets) out_scale_ += (y - out_mean_) * (y - out_mean_);
    out_scale_ = std::sqrt(out_scale_ / static_cast<double>(m));
    if (out_scale_ < 1e-12) out_scale_ = 1.0;

    std::vector<std::vector<double>> X(m);
    std::vector<double> Y(m);
    for (std::size_t r = 0; r < m; ++r) {
        X[r].resize(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j)
            X[r][static_cast<std::size_t>(j)] =
                (train.inputs[r][static_cast<std::size_t>(j)] -
                 in_mean_[static_cast<std::size_t>(j)]) /
                in_scale_[static_cast<std::size_t>(j)];
        Y[r] = (train.targets[r] - out_mean_) / out_scale_;
    }

    const int h = opt_.hidden;
    std::vector<double> gw1(w1_.size()), gb1(b1_.size()), gw2(w2_.size());
    std::vector<double> z(static_cast<std::size_t>(h)), a(static_cast<std::size_t>(h));
    std::vector<std::size_t> idx(m);
    for (std::size_t r = 0; r < m; ++r) idx[r] = r;
    std::mt19937_64 shuffle_rng(opt_.seed ^ 0x9e3779b97f4a7c15ull);

    for (int epoch = 0; epoch < opt_.epochs; ++epoch) {
        for (std::size_t i = m; i > 1; --i)
            std::swap(idx[i - 1], idx[shuffle_rng() % i]);
        for (std::size_t start = 0; start < m; start += static_cast<std::size_t>(opt_.batch)) {
            const std::size_t end = std::min(m, start + static_cast<std::size_t>(opt_.batch));
            const double inv = 1.0 / static_cast<double>(end - start);
            std::fill(gw1.begin(), gw1.end(), 0.0);
            std::fill(gb1.begin(), gb1.end(), 0.0);
            std::fill(gw2.begin(), gw2.end(), 0.0);
            double gb2 = 0.0, batch_loss = 0.0;
            for (std::size_t s = start; s < end; ++s) {
                const auto& x = X[idx[s]];
                double out = b2_;
                for (int u = 0; u < h; ++u) {
                    double zu = b1_[static_cast<std::size_t>(u)];
                    const double* row = &w1_[static_cast<std::size_t>(u) * k];
                    for (int j = 0; j < k; ++j) zu += row[j] * x[static_cast<std::size_t>(j)];
                    z[static_cast<std::size_t>(u)] = zu;
                    a[static_cast<std::size_t>(u)] = zu > 0 ? zu : 0.0;
                    out += w2_[static_cast<std::size_t>(u)] * a[static_cast<std::size_t>(u)];
                }
                const double e = out - Y[idx[s]];
                batch_loss += 0.5 * e * e;
                gb2 += e;
                for (int u = 0; u < h; ++u) {
                    gw2[static_cast<std::size_t>(u)] += e * a[static_cast<std::size_t>(u)];
                    if (z[static_cast<std::size_t>(u)] > 0) {
                        const double dz = e * w2_[static_cast<std::size_t>(u)];
                        gb1[static_cast<std::size_t>(u)] += dz;
                        double* grow = &gw1[static_cast<std::size_t>(u) * k];
                        for (int j = 0; j < k; ++j) grow[j] += dz * x[static_cast<std::size_t>(j)];
                    }
                }
            }
            if (!std::isfinite(batch_loss))
                throw TrainingError("network training diverged (non-finite loss)");
            const double step = opt_.learning_rate * inv;
            for (std::size_t i = 0; i < w1_.size(); ++i) w1_[i] -= step * gw1[i];
            for (std::size_t i = 0; i < b1_.size(); ++i) b1_[i] -= step * gb1[i];
            for (std::size_t i = 0; i < w2_.size(); ++i) w2_[i] -= step * gw2[i];
            b2_ -= step * gb2;
        }
    }
    ready_ = true;
}

double MlpForecaster::predict(std::span<const double> window) const {
    if (!ready_) throw TrainingError("network used before fitting");
    if (static_cast<int>(window.size()) != window_)
        throw ValidationError("window length does not match the fitted model");
    std::vector<double> x(window.size());
    for (std::size_t j = 0; j < window.size(); ++j)
        x[j] = (window[j] - in_mean_[j]) / in_scale_[j];
    return forward_std(x) * out_scale_ + out_mean_;
}

std::string MlpForecaster::name() const { return "mlp_" + std::to_string(opt_.hidden); }

std::vector<double> MlpForecaster::flat_params() const {
    std::vector<double> out;
    out.reserve(w1_.size() + b1_.size() + w2_.size() + 1);
    out.insert(out.end(), w1_.begin(), w1_.end());
    out.insert(out.end(), b1_.begin(), b1_.end());
    out.insert(out.end(), w2_.begin(), w2_.end());
    out.push_back(b2_);
    return out;
}

void MlpForecaster::set_flat_params(std::span<const double> params) {
    if (params.size() != w1_.size() + b1_.size() + w2_.size() + 1)
        throw ValidationError("parameter vector has the wrong length");
    std::size_t o = 0;
    for (double& w : w1_) w = params[o++];
    for (double& w : b1_) w = params[o++];
    for (double& w : w2_) w = params[o++];
    b2_ = params[o];
}

double MlpForecaster::sample_loss(std::span<const double> input, double target) const {
    if (!ready_) throw TrainingError("network used before initialization");
    std::vector<double> x(input.size());
    for (std::size_t j = 0; j < input.size(); ++j)
        x[j] = (input[j] - in_mean_[j]) / in_scale_[j];
    const double e = forward_std(x) - (target - out_mean_) / out_scale_;
    return 0.5 * e * e;
}

std::vector<double> MlpForecaster::sample_gradient(std::span<const double> input,
                                                   double target) const {
    if (!ready_) throw TrainingError("network used before initialization");
    const int h = opt_.hidden;
    const int k = window_;
    std::vector<double> x(input.size());
    for (std::size_t j = 0; j < input.size(); ++j)
        x[j] = (input[j] - in_mean_[j]) / in_scale_[j];
    std::vector<double> z(static_cast<std::size_t>(h)), a(static_cast<std::size_t>(h));
    double out = b2_;
    for (int u = 0; u < h; ++u) {
        double zu = b1_[static_cast<std::size_t>(u)];
        const double* row = &w1_[static_cast<std::size_t>(u) * k];
        for (int j = 0; j < k; ++j) zu += row[j] * x[static_cast<std::size_t>(j)];
        z[static_cast<std::size_t>(u)] = zu;
        a[static_cast<std::size_t>(u)] = zu > 0 ? zu : 0.0;
        out += w2_[static_cast<std::size_t>(u)] * a[static_cast<std::size_t>(u)];
    }
    const double e = out - (target - out_mean_) / out_scale_;
    std::vector<double> grad(w1_.size() + b1_.size() + w2_.size() + 1, 0.0);
    double* gw1 = grad.data();
    double* gb1 = gw1 + w1_.size();
    double* gw2 = gb1 + b1_.size();
    double& gb2 = grad.back();
    gb2 = e;
    for (int u = 0; u < h; ++u) {
        gw2[u] = e * a[static_cast<std::size_t>(u)];
        if (z[static_cast<std::size_t>(u)] > 0) {
            const double dz = e * w2_[static_cast<std::size_t>(u)];
            gb1[u] = dz;
            for (int j = 0; j < k; ++j)
                gw1[static_cast<std::size_t>(u) * k + j] = dz * x[static_cast<std::size_t>(j)];
        }
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Selection and reservations
// ---------------------------------------------------------------------------

std::vector<double> predict_rows(const Forecaster& model, const SupervisedWindowSet& rows) {
    std::vector<double> out;
    out.reserve(rows.rows());
    for (const auto& x : rows.inputs) out.push_back(model.predict(x));
    return out;
}

SelectionResult select_model(std::vector<std::unique_ptr<Forecaster>>& candidates,
                             const SupervisedWindowSet& train,
                             const SupervisedWindowSet& test) {
    if (candidates.empty()) throw ValidationError("no forecaster candidates");
    SelectionResult out;
    bool found = false;
    double best_r2 = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        ModelScore score;
        score.model = candidates[i]->name();
        try {
            candidates[i]->fit(train);
            const auto preds = predict_rows(*candidates[i], test);
            score.r2 = r_squared(test.targets, preds);
            score.mae = mae(test.targets, preds);
            score.ok = true;
            if (!found || score.r2 > best_r2) {
                found = true;
                best_r2 = score.r2;
                out.best = i;
            }
        } catch (const Error& e) {
            score.ok = false;
            score.error = e.what();
        }
        out.scores.push_back(std::move(score));
    }
    if (!found) throw TrainingError("every forecaster candidate failed");
    return out;
}

Viewers clamp_reservation(double predicted) {
    if (!std::isfinite(predicted)) throw TrainingError("non-finite reservation prediction");
    if (predicted <= 0.0) return 0;
    return static_cast<Viewers>(std::llround(std::ceil(predicted)));
}

std::vector<Viewers> reservation_pipeline(const std::vector<InstanceSeries>& history,
                                          const std::vector<const Forecaster*>& models,
                                          int window) {
    if (history.size() != models.size())
        throw ValidationError("one forecaster per region required");
    std::vector<Viewers> out;
    out.reserve(history.size());
    for (std::size_t r = 0; r < history.size(); ++r) {
        const auto& counts = history[r].counts;
        if (static_cast<int>(counts.size()) < window)
            throw InsufficientHistoryError("region " + std::to_string(history[r].region) +
                                           " has " + std::to_string(counts.size()) +
                                           " slots of history, need " +
                                           std::to_string(window));
        std::vector<double> w(static_cast<std::size_t>(window));
        for (int j = 0; j < window; ++j)
            w[static_cast<std::size_t>(j)] = static_cast<double>(
                counts[counts.size() - static_cast<std::size_t>(window) +
                       static_cast<std::size_t>(j)]);
        out.push_back(clamp_reservation(models[r]->predict(w)));
    }
    return out;
}

std::vector<std::unique_ptr<Forecaster>> default_model_grid(int window, int mlp_epochs,
                                                            double mlp_learning_rate,
                                                            int mlp_batch,
                                                            std::uint64_t seed) {
    std::vector<std::unique_ptr<Forecaster>> out;
    out.push_back(std::make_unique<SeasonalNaiveForecaster>(std::min(24, window)));
    for (double lambda : {0.01, 0.1, 1.0})
        out.push_back(std::make_unique<RidgeArForecaster>(lambda));
    for (int hidden : {32, 100}) {
        MlpOptions opt;
        opt.hidden = hidden;
        opt.epochs = mlp_epochs;
        opt.batch = mlp_batch;
        opt.learning_rate = mlp_learning_rate;
        opt.seed = seed + static_cast<std::uint64_t>(hidden);
        out.push_back(std::make_unique<MlpForecaster>(opt));
    }
    return out;
}

}  // namespace lvsim
