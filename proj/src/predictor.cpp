#include "flash/predictor.hpp"

#include <cmath>

namespace flash {

TrainingSplit training_split(Eigen::Index history_length, int lag) {
    if (history_length < kMinTrainPoints + lag + 1) {
        throw ModelError("training_split: history of " + std::to_string(history_length) +
                         " points is too short");
    }
    const auto tenth = Eigen::Index(std::ceil(0.1 * double(history_length)));
    TrainingSplit split;
    split.train_end = std::max(tenth, kMinTrainPoints);
    split.holdout_end = history_length;
    return split;
}

ARModel fit_ar(const Eigen::Ref<const Vector>& train, double ridge, int lag) {
    if (lag < 1) {
        throw InputError("fit_ar: lag must be positive");
    }
    const Eigen::Index rows = train.size() - lag;
    if (rows < lag + 1) {
        throw ModelError("fit_ar: need at least " + std::to_string(lag + 1) + " lagged rows");
    }
    if (!(ridge >= 0.0)) {
        throw InputError("fit_ar: ridge must be nonnegative");
    }
    Matrix design(rows, lag);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (int i = 1; i <= lag; ++i) {
            design(r, i - 1) = train[lag + r - i];
        }
    }
    const Vector target = train.tail(rows);

    Matrix gram = design.transpose() * design;
    gram.diagonal().array() += ridge;
    const Vector rhs = design.transpose() * target;

    ARModel model;
    model.ridge = ridge;
    model.train_end = train.size();
    if (rhs.isZero(0.0)) {
        model.weights = Vector::Zero(lag);
        return model;
    }
    model.weights = gram.ldlt().solve(rhs);
    if (!model.weights.allFinite()) {
        throw ModelError("fit_ar: singular design");
    }
    return model;
}

double predict(const ARModel& model, const Eigen::Ref<const Vector>& corrected, Eigen::Index t) {
    const int lag = model.lag();
    if (t < lag || t > corrected.size()) {
        throw ModelError("predict: index " + std::to_string(t) + " lacks " + std::to_string(lag) +
                         " lags");
    }
    return model.weights.dot(corrected.segment(t - lag, lag).reverse());
}

double predict_next(const ARModel& model, const Eigen::Ref<const Vector>& recent) {
    return predict(model, recent, recent.size());
}

}  // namespace flash
