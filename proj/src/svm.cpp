#include <algorithm>
#include <cmath>
#include <limits>

#include "fit_util.hpp"
#include "stylemill/errors.hpp"
#include "stylemill/learners.hpp"

namespace stylemill {

namespace {

// Sequential minimal optimization on the SVM dual (Platt, 1998), made
// deterministic: the second-choice heuristic is argmax |E1 - E2| with plain
// index-order fallback scans instead of Platt's randomized starting points.
class SmoSolver {
  public:
    SmoSolver(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
              const SvmConfig& cfg)
        : x_(x), y_(y), cfg_(cfg), n_(x.size()) {
        alpha_.assign(n_, 0.0);
        error_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) error_[i] = -static_cast<double>(y_[i]); // f = 0
    }

    // Returns true when every point satisfies its KKT condition within tol
    // on freshly computed errors; false when the pass budget ran out first.
    bool solve() {
        bool examine_all = true;
        std::size_t num_changed = 0;
        std::size_t passes = 0;
        while (num_changed > 0 || examine_all) {
            if (++passes > cfg_.max_passes) return false;
            num_changed = 0;
            for (std::size_t i = 0; i < n_; ++i) {
                if (!examine_all && !non_bound(i)) continue;
                num_changed += examine(i);
            }
            if (examine_all) examine_all = false;
            else if (num_changed == 0) examine_all = true;
        }
        // The loop only exits after a full pass saw no violation on fresh
        // errors, which is exactly the KKT-within-tol guarantee.
        return true;
    }

    // When the solution has no non-bound support vector the dual fixes b only
    // to an interval, and the value left by the last pair step can sit outside
    // the KKT-feasible part of it (Keerthi et al. 2001 on Platt's single-b
    // check). Recentre b on the interval's midpoint; with non-bound SVs the
    // interval is pinned and the tracked value is already within tolerance.
    void recenter_b() {
        for (std::size_t i = 0; i < n_; ++i)
            if (non_bound(i)) return;
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n_; ++i) {
            double on_margin = y_[i] - (decision(i) - b_); // b putting i exactly on its margin
            bool lower = (alpha_[i] == 0.0) == (y_[i] > 0); // alpha=0,+1 or alpha=C,-1
            if (lower) lo = std::max(lo, on_margin);
            else hi = std::min(hi, on_margin);
        }
        if (std::isinf(lo)) b_ = hi;
        else if (std::isinf(hi)) b_ = lo;
        else b_ = 0.5 * (lo + hi);
    }

    double kern(std::size_t i, std::size_t j) const { return kernel(x_[i], x_[j]); }

    double kernel(const std::vector<double>& u, const std::vector<double>& v) const {
        if (cfg_.kernel == Kernel::Linear) {
            double dot = 0.0;
            for (std::size_t j = 0; j < u.size(); ++j) dot += u[j] * v[j];
            return dot;
        }
        double dist2 = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) {
            double diff = u[j] - v[j];
            dist2 += diff * diff;
        }
        return std::exp(-cfg_.gamma * dist2);
    }

    double decision(std::size_t i) const {
        double f = b_;
        for (std::size_t j = 0; j < n_; ++j)
            if (alpha_[j] != 0.0) f += alpha_[j] * y_[j] * kern(j, i);
        return f;
    }

    const std::vector<double>& alpha() const { return alpha_; }
    double b() const { return b_; }

  private:
    static constexpr double kStepEps = 1e-8;
    static constexpr double kSnapEps = 1e-12;

    bool non_bound(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < cfg_.c; }

    int examine(std::size_t i2) {
        double y2 = y_[i2];
        double alph2 = alpha_[i2];
        double e2 = decision(i2) - y2; // fresh, so convergence is trustworthy
        error_[i2] = e2;
        double r2 = e2 * y2;
        bool violates = (r2 < -cfg_.tol && alph2 < cfg_.c) || (r2 > cfg_.tol && alph2 > 0.0);
        if (!violates) return 0;

        // First choice: the non-bound point with the largest |E1 - E2|.
        std::size_t best = n_;
        double best_gap = -1.0;
        for (std::size_t j = 0; j < n_; ++j) {
            if (j == i2 || !non_bound(j)) continue;
            double gap = std::abs(error_[j] - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = j;
            }
        }
        if (best < n_ && take_step(best, i2)) return 1;
        for (std::size_t j = 0; j < n_; ++j)
            if (j != i2 && j != best && non_bound(j) && take_step(j, i2)) return 1;
        for (std::size_t j = 0; j < n_; ++j)
            if (j != i2 && !non_bound(j) && take_step(j, i2)) return 1;
        return 0;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        double alph1 = alpha_[i1], alph2 = alpha_[i2];
        double y1 = y_[i1], y2 = y_[i2];
        double e1 = non_bound(i1) ? error_[i1] : decision(i1) - y1;
        double e2 = error_[i2];
        double s = y1 * y2;
        const double c = cfg_.c;

        double low, high;
        if (y1 != y2) {
            low = std::max(0.0, alph2 - alph1);
            high = std::min(c, c + alph2 - alph1);
        } else {
            low = std::max(0.0, alph1 + alph2 - c);
            high = std::min(c, alph1 + alph2);
        }
        if (low >= high) return false;

        double k11 = kern(i1, i1), k12 = kern(i1, i2), k22 = kern(i2, i2);
        double eta = k11 + k22 - 2.0 * k12;
        double a2;
        if (eta > 0.0) {
            a2 = std::clamp(alph2 + y2 * (e1 - e2) / eta, low, high);
        } else {
            // Degenerate curvature: evaluate the objective at both clip ends.
            double f1 = y1 * (e1 - b_) - alph1 * k11 - s * alph2 * k12;
            double f2 = y2 * (e2 - b_) - s * alph1 * k12 - alph2 * k22;
            double l1 = alph1 + s * (alph2 - low);
            double h1 = alph1 + s * (alph2 - high);
            double low_obj = l1 * f1 + low * f2 + 0.5 * l1 * l1 * k11 + 0.5 * low * low * k22 +
                             s * low * l1 * k12;
            double high_obj = h1 * f1 + high * f2 + 0.5 * h1 * h1 * k11 +
                              0.5 * high * high * k22 + s * high * h1 * k12;
            if (low_obj < high_obj - kStepEps) a2 = low;
            else if (low_obj > high_obj + kStepEps) a2 = high;
            else return false;
        }
        if (std::abs(a2 - alph2) < kStepEps * (a2 + alph2 + kStepEps)) return false;

        double a1 = alph1 + s * (alph2 - a2);
        // Roundoff cleanup; keeps 0 <= alpha <= C exact. Residues within
        // kSnapEps*C of a bound are snapped onto it (as in Platt's pseudocode)
        // so bound membership in the KKT tests stays exact; the deltas below
        // use the snapped values, keeping the error cache consistent.
        a1 = std::clamp(a1, 0.0, c);
        if (a1 < kSnapEps * c) a1 = 0.0;
        else if (a1 > c - kSnapEps * c) a1 = c;
        if (a2 < kSnapEps * c) a2 = 0.0;
        else if (a2 > c - kSnapEps * c) a2 = c;
        if (a1 == alph1 && a2 == alph2) return false;

        double d1 = y1 * (a1 - alph1), d2 = y2 * (a2 - alph2);
        double b1 = b_ - e1 - d1 * k11 - d2 * k12;
        double b2 = b_ - e2 - d1 * k12 - d2 * k22;
        double b_new;
        if (a1 > 0.0 && a1 < c) b_new = b1;
        else if (a2 > 0.0 && a2 < c) b_new = b2;
        else b_new = 0.5 * (b1 + b2);

        double db = b_new - b_;
        for (std::size_t j = 0; j < n_; ++j)
            error_[j] += d1 * kern(i1, j) + d2 * kern(i2, j) + db;
        alpha_[i1] = a1;
        alpha_[i2] = a2;
        b_ = b_new;
        return true;
    }

    const std::vector<std::vector<double>>& x_;
    const std::vector<int>& y_;
    SvmConfig cfg_;
    std::size_t n_;
    std::vector<double> alpha_;
    std::vector<double> error_;
    double b_ = 0.0;
};

} // namespace

double SvmClassifier::kernel_value(const std::vector<double>& u,
                                   const std::vector<double>& v) const {
    if (kernel == Kernel::Linear) {
        double dot = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) dot += u[j] * v[j];
        return dot;
    }
    double dist2 = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        double diff = u[j] - v[j];
        dist2 += diff * diff;
    }
    return std::exp(-gamma * dist2);
}

double SvmClassifier::score(const std::vector<double>& x) const {
    double f = b;
    for (std::size_t i = 0; i < support_vectors.size(); ++i)
        f += coeff[i] * kernel_value(support_vectors[i], x);
    return f;
}

nlohmann::json SvmClassifier::params_json() const {
    return {{"kernel", kernel_name(kernel)}, {"gamma", gamma},
            {"b", b},                        {"support_vectors", support_vectors},
            {"coeff", coeff},                {"alpha", alpha},
            {"train_y", train_y}};
}

std::shared_ptr<SvmClassifier> SvmClassifier::from_json(const nlohmann::json& j) {
    auto m = std::make_shared<SvmClassifier>();
    m->kernel = kernel_from_name(j.at("kernel").get<std::string>());
    m->gamma = j.at("gamma").get<double>();
    m->b = j.at("b").get<double>();
    m->support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    m->coeff = j.at("coeff").get<std::vector<double>>();
    m->alpha = j.at("alpha").get<std::vector<double>>();
    m->train_y = j.at("train_y").get<std::vector<int>>();
    return m;
}

TrainedModel fit_svm(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     const std::vector<std::string>& feature_names, Dimension dim,
                     const SvmConfig& cfg) {
    detail::check_matrix(x, y, "SVM");
    detail::check_two_classes(y, "SVM");
    if (!(cfg.c > 0.0)) throw ConfigError("SVM penalty C must be positive");
    if (cfg.kernel == Kernel::Rbf && !(cfg.gamma > 0.0))
        throw ConfigError("rbf gamma must be positive");

    Standardization stand = Standardization::fit(x);
    std::vector<std::vector<double>> z;
    z.reserve(x.size());
    for (const auto& row : x) z.push_back(stand.apply(row));

    SmoSolver solver(z, y, cfg);
    bool converged = solver.solve();
    solver.recenter_b();

    auto clf = std::make_shared<SvmClassifier>();
    clf->kernel = cfg.kernel;
    clf->gamma = cfg.gamma;
    clf->b = solver.b();
    clf->alpha = solver.alpha();
    clf->train_y = y;
    for (std::size_t i = 0; i < z.size(); ++i)
        if (clf->alpha[i] > 0.0) {
            clf->support_vectors.push_back(z[i]);
            clf->coeff.push_back(clf->alpha[i] * y[i]);
        }

    TrainedModel model;
    model.kind = "svm";
    model.dimension = dim;
    model.feature_names = feature_names;
    model.standardization = stand;
    model.converged = converged;
    model.classifier = clf;
    return model;
}

} // namespace stylemill
