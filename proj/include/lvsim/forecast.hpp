#pragma once
// Hourly instance-count series, sliding-window supervised datasets, and a
// small zoo of one-step-ahead forecasters (seasonal repeat, ridge
// autoregression, single-hidden-layer network) used to size next-hour
// reservations. Model selection is by held-out R-squared on a chronological
// split; reservations round predictions up and never go negative.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lvsim/core.hpp"

namespace lvsim {

struct SeriesTooShortError : Error {
    using Error::Error;
};
struct DegenerateActualsError : Error {
    using Error::Error;
};
struct TrainingError : Error {
    using Error::Error;
};
struct InsufficientHistoryError : Error {
    using Error::Error;
};

// Hourly instance counts for one region.
struct InstanceSeries {
    int region = 0;
    std::vector<Viewers> counts;

    bool operator==(const InstanceSeries&) const = default;
};

// One-step-ahead rows: each input is `window` consecutive counts, the target
// is the count immediately after them. Row i starts at series offset i, so
// rows are in chronological order.
struct SupervisedWindowSet {
    int window = 0;
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;

    std::size_t rows() const { return targets.size(); }
};

SupervisedWindowSet build_windows(const InstanceSeries& series, int window);

// Splits rows chronologically; the first floor(rows * train_fraction) rows
// train, the rest test. Both halves must be non-empty.
std::pair<SupervisedWindowSet, SupervisedWindowSet> chronological_split(
    const SupervisedWindowSet& all, double train_fraction);

// Coefficient of determination of predictions against actuals. Throws
// DegenerateActualsError when the actuals have zero variance.
double r_squared(std::span<const double> actual, std::span<const double> predicted);
double mae(std::span<const double> actual, std::span<const double> predicted);

class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual void fit(const SupervisedWindowSet& train) = 0;
    virtual double predict(std::span<const double> window) const = 0;
    virtual std::string name() const = 0;
};

// Repeats the value observed one period earlier.
class SeasonalNaiveForecaster final : public Forecaster {
public:
    explicit SeasonalNaiveForecaster(int period);
    void fit(const SupervisedWindowSet& train) override;
    double predict(std::span<const double> window) const override;
    std::string name() const override;

private:
    int period_;
};

// Closed-form ridge regression from the window (plus an unpenalized
// intercept) to the next value. lambda = 0 is allowed; a singular normal
// system is reported so the caller can raise lambda.
class RidgeArForecaster final : public Forecaster {
public:
    explicit RidgeArForecaster(double lambda);
    void fit(const SupervisedWindowSet& train) override;
    double predict(std::span<const double> window) const override;
    std::string name() const override;

private:
    double lambda_;
    int window_ = -1;
    std::vector<double> beta_;
    double intercept_ = 0.0;
};

struct MlpOptions {
    int hidden = 100;
    int epochs = 300;
    int batch = 32;
    double learning_rate = 0.01;
    std::uint64_t seed = 1;
};

// One hidden layer with rectified units, linear output, squared loss,
// minibatch gradient descent. Inputs and target are standardized with
// training-set statistics. Fully deterministic for a fixed seed.
class MlpForecaster final : public Forecaster {
public:
    explicit MlpForecaster(MlpOptions opt);
    void fit(const SupervisedWindowSet& train) override;
    double predict(std::span<const double> window) const override;
    std::string name() const override;

    // Weight-space access for derivative verification: random parameters
    // without any data, a flat parameter vector in a fixed order, and the
    // loss plus its analytic gradient for one sample.
    void init_random(int window, std::uint64_t seed);
    std::vector<double> flat_params() const;
    void set_flat_params(std::span<const double> params);
    double sample_loss(std::span<const double> input, double target) const;
    std::vector<double> sample_gradient(std::span<const double> input, double target) const;

private:
    MlpOptions opt_;
    int window_ = -1;
    bool ready_ = false;
    std::vector<double> w1_, b1_, w2_;  // w1 is hidden x window, row-major
    double b2_ = 0.0;
    std::vector<double> in_mean_, in_scale_;
    double out_mean_ = 0.0, out_scale_ = 1.0;

    double forward_std(std::span<const double> x) const;
};

struct ModelScore {
    std::string model;
    double r2 = 0.0;
    double mae = 0.0;
    bool ok = false;
    std::string error;
};

struct SelectionResult {
    std::size_t best = 0;  // index into the candidate list
    std::vector<ModelScore> scores;
};

// Fits every candidate on the training rows and scores one-step predictions
// on the held-out rows; the highest test R-squared wins, first candidate on
// ties. Candidates that fail to fit or score are skipped; if all fail, a
// TrainingError is thrown.
SelectionResult select_model(std::vector<std::unique_ptr<Forecaster>>& candidates,
                             const SupervisedWindowSet& train,
                             const SupervisedWindowSet& test);

std::vector<double> predict_rows(const Forecaster& model, const SupervisedWindowSet& rows);

// Reservation counts are whole instances: round up, never below zero.
Viewers clamp_reservation(double predicted);

// Next-slot reservation per region from each region's trailing window.
std::vector<Viewers> reservation_pipeline(const std::vector<InstanceSeries>& history,
                                          const std::vector<const Forecaster*>& models,
                                          int window);

// The default candidate grid: one seasonal repeat, three ridge strengths,
// two hidden-layer widths.
std::vector<std::unique_ptr<Forecaster>> default_model_grid(int window, int mlp_epochs,
                                                            double mlp_learning_rate,
                                                            int mlp_batch,
                                                            std::uint64_t seed);

}  // namespace lvsim
