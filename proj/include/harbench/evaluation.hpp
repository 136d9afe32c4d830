#pragma once

#include <string>
#include <utility>
#include <vector>

#include "harbench/matrix.hpp"

namespace harbench {

struct Confusion {
    std::vector<std::string> classes;
    std::vector<std::size_t> counts;  // classes x classes, rows = true, cols = predicted

    std::size_t at(std::size_t true_c, std::size_t pred_c) const {
        return counts[true_c * classes.size() + pred_c];
    }
};

double accuracy(const std::vector<std::string>& pred, const std::vector<std::string>& truth);

Confusion confusion_matrix(const std::vector<std::string>& pred,
                           const std::vector<std::string>& truth,
                           const std::vector<std::string>& class_list);

double accuracy(const Confusion& c);

/// Unweighted mean of per-class F1 (0 when precision + recall is 0); classes
/// absent from both pred and truth contribute 0.
double macro_f_measure(const std::vector<std::string>& pred,
                       const std::vector<std::string>& truth,
                       const std::vector<std::string>& class_list);
double macro_f_measure(const Confusion& c);

struct FoldResult {
    std::size_t fold_id = 0;
    double accuracy = 0.0;
    double macro_f = 0.0;
    Confusion confusion;
};

/// Student-t quantile via regularized incomplete beta inversion. dof may be
/// fractional (Welch). Accurate to ~1e-10.
double student_t_quantile(double p, double dof);

/// Student-t interval on the mean: mean +/- t_{(1+level)/2, n-1} * s / sqrt(n)
/// with the (n-1)-denominator sample standard deviation. Requires n >= 2.
std::pair<double, double> confidence_interval(const std::vector<double>& values, double level);

struct EquivalenceVerdict {
    double mean_diff = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool equivalent = true;  // true iff the interval contains zero
};

/// Welch unpaired t-test as an equivalence check: the two samples are
/// equivalent when the confidence interval of the mean difference spans zero.
EquivalenceVerdict unpaired_ttest(const std::vector<double>& a, const std::vector<double>& b,
                                  double level = 0.90);

struct LdaResult {
    Matrix projected;               // n x m
    Matrix directions;              // d x m, unit-norm columns, sign fixed
    std::vector<double> eigenvalues;
};

/// Linear discriminant directions: top eigenvectors of inv(S_W) S_B with the
/// within-class scatter regularized by 1e-6 * (trace/d) * I. At most
/// min(classes - 1, d) components are returned.
LdaResult lda_project(const Matrix& X, const std::vector<std::string>& y,
                      std::size_t n_components = 2);

/// Between-class over within-class variance of labeled points along a
/// direction; the quantity LDA's first component maximizes.
double separability_ratio(const Matrix& X, const std::vector<std::string>& y,
                          const std::vector<double>& direction);

}  // namespace harbench
