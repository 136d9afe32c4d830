#include "harbench/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <Eigen/Dense>

namespace harbench {

double accuracy(const std::vector<std::string>& pred, const std::vector<std::string>& truth) {
    if (pred.empty()) throw std::invalid_argument("accuracy: empty input");
    if (pred.size() != truth.size()) throw std::invalid_argument("accuracy: length mismatch");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

Confusion confusion_matrix(const std::vector<std::string>& pred,
                           const std::vector<std::string>& truth,
                           const std::vector<std::string>& class_list) {
    if (pred.empty()) throw std::invalid_argument("confusion_matrix: empty input");
    if (pred.size() != truth.size())
        throw std::invalid_argument("confusion_matrix: length mismatch");
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < class_list.size(); ++i) idx[class_list[i]] = i;

    Confusion c;
    c.classes = class_list;
    c.counts.assign(class_list.size() * class_list.size(), 0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        auto t = idx.find(truth[i]);
        auto p = idx.find(pred[i]);
        if (t == idx.end() || p == idx.end())
            throw std::invalid_argument("confusion_matrix: label outside class list");
        ++c.counts[t->second * class_list.size() + p->second];
    }
    return c;
}

double accuracy(const Confusion& c) {
    std::size_t total = 0, diag = 0;
    for (std::size_t t = 0; t < c.classes.size(); ++t)
        for (std::size_t p = 0; p < c.classes.size(); ++p) {
            total += c.at(t, p);
            if (t == p) diag += c.at(t, p);
        }
    if (total == 0) throw std::invalid_argument("accuracy: empty confusion matrix");
    return static_cast<double>(diag) / static_cast<double>(total);
}

double macro_f_measure(const Confusion& c) {
    const std::size_t C = c.classes.size();
    double sum = 0.0;
    for (std::size_t k = 0; k < C; ++k) {
        std::size_t tp = c.at(k, k), fp = 0, fn = 0;
        for (std::size_t o = 0; o < C; ++o) {
            if (o == k) continue;
            fp += c.at(o, k);
            fn += c.at(k, o);
        }
        const double prec = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double rec = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        sum += prec + rec == 0.0 ? 0.0 : 2.0 * prec * rec / (prec + rec);
    }
    return sum / static_cast<double>(C);
}

double macro_f_measure(const std::vector<std::string>& pred,
                       const std::vector<std::string>& truth,
                       const std::vector<std::string>& class_list) {
    return macro_f_measure(confusion_matrix(pred, truth, class_list));
}

// ---- Student-t quantiles -----------------------------------------------------

namespace {

// regularized incomplete beta via continued fraction (modified Lentz)
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16, kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * reg_inc_beta(dof / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

}  // namespace

double student_t_quantile(double p, double dof) {
    if (dof <= 0.0) throw std::invalid_argument("student_t_quantile: dof must be > 0");
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("student_t_quantile: p must be in (0,1)");
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -student_t_quantile(1.0 - p, dof);

    double lo = 0.0, hi = 1.0;
    while (student_t_cdf(hi, dof) < p && hi < 1e12) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, dof) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

namespace {
void mean_var(const std::vector<double>& v, double& mean, double& var) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size() - 1);
}
}  // namespace

std::pair<double, double> confidence_interval(const std::vector<double>& values, double level) {
    if (values.size() < 2) throw std::invalid_argument("confidence_interval: need n >= 2");
    if (level <= 0.0 || level >= 1.0)
        throw std::invalid_argument("confidence_interval: level must be in (0,1)");
    double mean, var;
    mean_var(values, mean, var);
    const double half = student_t_quantile(0.5 * (1.0 + level), static_cast<double>(values.size() - 1)) *
                        std::sqrt(var / static_cast<double>(values.size()));
    return {mean - half, mean + half};
}

EquivalenceVerdict unpaired_ttest(const std::vector<double>& a, const std::vector<double>& b,
                                  double level) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("unpaired_ttest: need n >= 2 on each side");
    double ma, va, mb, vb;
    mean_var(a, ma, va);
    mean_var(b, mb, vb);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double sa = va / na, sb = vb / nb;
    const double se = std::sqrt(sa + sb);

    EquivalenceVerdict v;
    v.mean_diff = ma - mb;
    if (se == 0.0) {
        v.ci_low = v.ci_high = v.mean_diff;
    } else {
        // Welch-Satterthwaite degrees of freedom
        const double dof = (sa + sb) * (sa + sb) /
                           (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
        const double half = student_t_quantile(0.5 * (1.0 + level), dof) * se;
        v.ci_low = v.mean_diff - half;
        v.ci_high = v.mean_diff + half;
    }
    v.equivalent = v.ci_low <= 0.0 && 0.0 <= v.ci_high;
    return v;
}

// ---- linear discriminant analysis ---------------------------------------------

LdaResult lda_project(const Matrix& X, const std::vector<std::string>& y,
                      std::size_t n_components) {
    if (X.rows != y.size()) throw std::invalid_argument("lda_project: X and y sizes differ");
    if (X.rows == 0 || X.cols == 0) throw std::invalid_argument("lda_project: empty input");

    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
    const std::size_t C = by_class.size(), d = X.cols, n = X.rows;
    if (C < 2) throw std::invalid_argument("lda_project: need >= 2 classes");
    for (const auto& [label, idx] : by_class)
        if (idx.size() < 2)
            throw std::invalid_argument("lda_project: class " + label + " has < 2 samples");

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Xm(
        X.data.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));

    Eigen::VectorXd global_mean = Xm.colwise().mean().transpose();
    Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(d, d);
    for (const auto& [label, idx] : by_class) {
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
        for (std::size_t i : idx) mu += Xm.row(i).transpose();
        mu /= static_cast<double>(idx.size());
        for (std::size_t i : idx) {
            const Eigen::VectorXd c = Xm.row(i).transpose() - mu;
            sw += c * c.transpose();
        }
        const Eigen::VectorXd m = mu - global_mean;
        sb += static_cast<double>(idx.size()) * m * m.transpose();
    }

    const double tr = sw.trace();
    const double ridge = 1e-6 * (tr > 0.0 ? tr / static_cast<double>(d) : 1.0);
    sw += ridge * Eigen::MatrixXd::Identity(d, d);

    Eigen::LLT<Eigen::MatrixXd> llt(sw);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("lda_project: within-class scatter is singular beyond regularization");
    const Eigen::MatrixXd L = llt.matrixL();
    // symmetrized problem: eigenvectors of inv(L) S_B inv(L)^T
    Eigen::MatrixXd M = L.triangularView<Eigen::Lower>().solve(sb);
    M = L.triangularView<Eigen::Lower>().solve(M.transpose()).transpose();
    M = 0.5 * (M + M.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw std::runtime_error("lda_project: eigensolver failed");

    const std::size_t m_avail = std::min({n_components, C - 1, d});
    LdaResult res;
    res.directions = Matrix(d, m_avail);
    res.projected = Matrix(n, m_avail);
    for (std::size_t k = 0; k < m_avail; ++k) {
        const auto col = static_cast<Eigen::Index>(d - 1 - k);  // eigenvalues ascend in Eigen
        Eigen::VectorXd w = L.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors().col(col));
        w.normalize();
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            if (std::fabs(w[i]) > 1e-12) {
                if (w[i] < 0.0) w = -w;
                break;
            }
        }
        res.eigenvalues.push_back(es.eigenvalues()[col]);
        for (std::size_t i = 0; i < d; ++i) res.directions.at(i, k) = w[static_cast<Eigen::Index>(i)];
        Eigen::VectorXd proj = Xm * w;
        for (std::size_t i = 0; i < n; ++i) res.projected.at(i, k) = proj[static_cast<Eigen::Index>(i)];
    }
    return res;
}

double separability_ratio(const Matrix& X, const std::vector<std::string>& y,
                          const std::vector<double>& direction) {
    if (X.rows != y.size() || X.cols != direction.size())
        throw std::invalid_argument("separability_ratio: shape mismatch");

    std::map<std::string, std::pair<double, std::size_t>> class_sum;
    std::vector<double> proj(X.rows, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        double p = 0.0;
        for (std::size_t c = 0; c < X.cols; ++c) p += X.at(i, c) * direction[c];
        proj[i] = p;
        total += p;
        auto& e = class_sum[y[i]];
        e.first += p;
        ++e.second;
    }
    const double global_mean = total / static_cast<double>(X.rows);

    double between = 0.0, within = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        const auto& e = class_sum[y[i]];
        const double mu = e.first / static_cast<double>(e.second);
        within += (proj[i] - mu) * (proj[i] - mu);
    }
    for (const auto& [label, e] : class_sum) {
        const double mu = e.first / static_cast<double>(e.second);
        between += static_cast<double>(e.second) * (mu - global_mean) * (mu - global_mean);
    }
    if (within <= 0.0)
        return between > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return between / within;
}

}  // namespace harbench
