#pragma once

#include "flash/core.hpp"

namespace flash {

inline constexpr int kDefaultLag = 7;
inline constexpr double kDefaultRidge = 1e-6;
inline constexpr Eigen::Index kMinTrainPoints = 30;

/// Lag-p linear autoregression without intercept:
/// prediction(t) = sum_i weights[i - 1] * corrected[t - i].
struct ARModel {
    Vector weights = Vector::Zero(kDefaultLag);
    double ridge = kDefaultRidge;
    Eigen::Index train_end = 0;

    int lag() const { return int(weights.size()); }
};

/// Chronological split: train is the first max(ceil(0.1 * T), 30) points.
struct TrainingSplit {
    Eigen::Index train_begin = 0;
    Eigen::Index train_end = 0;    // exclusive; first holdout index
    Eigen::Index holdout_end = 0;  // exclusive

    Eigen::Index train_size() const { return train_end - train_begin; }
    Eigen::Index holdout_size() const { return holdout_end - train_end; }
    bool operator==(const TrainingSplit&) const = default;
};

/// Requires T >= 30 + lag + 1 so at least one holdout point exists.
TrainingSplit training_split(Eigen::Index history_length, int lag = kDefaultLag);

/// Ridge least squares on lagged rows, solved through the normal equations.
/// Needs at least lag + 1 rows, i.e. 2 * lag + 1 values.
ARModel fit_ar(const Eigen::Ref<const Vector>& train, double ridge = kDefaultRidge,
               int lag = kDefaultLag);

/// One-step prediction for index t from corrected[t - lag .. t - 1].
double predict(const ARModel& model, const Eigen::Ref<const Vector>& corrected, Eigen::Index t);

/// Prediction from the most recent `lag` values (tail of the series), i.e. for
/// the day after the last one.
double predict_next(const ARModel& model, const Eigen::Ref<const Vector>& recent);

}  // namespace flash
