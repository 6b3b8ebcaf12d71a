#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace coda {

// Dense row-major design matrix used by the solvers.
struct DataMatrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> values;

    DataMatrix() = default;
    DataMatrix(size_t r, size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
    double* row(size_t i) { return values.data() + i * cols; }
    const double* row(size_t i) const { return values.data() + i * cols; }
    double& at(size_t i, size_t j) { return values[i * cols + j]; }
    double at(size_t i, size_t j) const { return values[i * cols + j]; }
};

// Gathers a column subset (and optionally a row subset) into a new matrix.
DataMatrix gather_columns(const DataMatrix& X, std::span<const int> columns);
DataMatrix gather_rows(const DataMatrix& X, std::span<const int> rows);

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
};

enum class ClassWeighting { none, inverse_frequency };

struct TrainConfig {
    double C = 1.0;
    ClassWeighting class_weighting = ClassWeighting::none;
    int cv_folds = 5;
    double tolerance = 1e-3;   // duality-gap stopping criterion
    int max_iterations = 1000; // epochs over the active set
};

struct SvmStats {
    std::vector<double> alpha;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double duality_gap = 0.0;
    int epochs = 0;
};

// Hinge-loss linear SVM trained by dual coordinate descent with seeded
// coordinate shuffling and shrinking. The bias is handled as an augmented
// constant feature, so it participates in the regularizer:
//   min_w,b  (||w||^2 + b^2)/2 + sum_i C_i max(0, 1 - y_i (w.x_i + b)).
// Stops when the duality gap drops below cfg.tolerance (or max_iterations).
// Throws TrainError on single-class labels or non-finite features.
LinearModel train_linear_svm(const DataMatrix& X, std::span<const int> y, const TrainConfig& cfg,
                             std::uint64_t seed, SvmStats* stats = nullptr);

double decision_value(const LinearModel& m, std::span<const double> x);

// Per-class box bounds implied by cfg (inverse-frequency weighting scales C
// by n / (2 n_class)).
void class_bounds(std::span<const int> y, const TrainConfig& cfg, double& c_pos, double& c_neg);

// Maximum KKT violation of the dual iterate; used by tests and diagnostics.
double kkt_residual(const DataMatrix& X, std::span<const int> y, const LinearModel& m,
                    std::span<const double> alpha, double c_pos, double c_neg);

}  // namespace coda
