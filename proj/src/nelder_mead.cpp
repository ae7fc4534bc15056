#include "qrebal/nelder_mead.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace qrebal {

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0, double step,
                             int max_evals, double ftol) {
    const Index dim = x0.size();
    NelderMeadResult best{x0, 0.0, 0};
    bool have_best = false;

    auto eval = [&](const Vector& x) {
        const double v = f(x);
        ++best.evaluations;
        if (!have_best || v < best.fx) {
            best.x = x;
            best.fx = v;
            have_best = true;
        }
        return v;
    };
    auto budget_left = [&] { return best.evaluations < max_evals; };

    std::vector<Vector> pts;
    std::vector<double> vals;
    pts.push_back(x0);
    vals.push_back(eval(x0));
    for (Index i = 0; i < dim && budget_left(); ++i) {
        Vector p = x0;
        p(i) += step;
        pts.push_back(p);
        vals.push_back(eval(p));
    }
    if (static_cast<Index>(pts.size()) < dim + 1) {
        return best;
    }

    std::vector<std::size_t> order(pts.size());
    while (budget_left()) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
        const std::size_t lo = order.front();
        const std::size_t hi = order.back();
        const std::size_t second = order[order.size() - 2];
        if (vals[hi] - vals[lo] < ftol) {
            break;
        }

        Vector centroid = Vector::Zero(dim);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i != hi) centroid += pts[i];
        }
        centroid /= static_cast<double>(dim);

        const Vector reflected = centroid + (centroid - pts[hi]);
        const double fr = eval(reflected);
        if (fr < vals[lo]) {
            if (!budget_left()) {
                pts[hi] = reflected;
                vals[hi] = fr;
                break;
            }
            const Vector expanded = centroid + 2.0 * (centroid - pts[hi]);
            const double fe = eval(expanded);
            if (fe < fr) {
                pts[hi] = expanded;
                vals[hi] = fe;
            } else {
                pts[hi] = reflected;
                vals[hi] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[hi] = reflected;
            vals[hi] = fr;
            continue;
        }
        if (!budget_left()) break;

        const bool outside = fr < vals[hi];
        const Vector contracted =
            outside ? Vector(centroid + 0.5 * (reflected - centroid)) : Vector(centroid + 0.5 * (pts[hi] - centroid));
        const double fc = eval(contracted);
        if (fc < (outside ? fr : vals[hi])) {
            pts[hi] = contracted;
            vals[hi] = fc;
            continue;
        }

        for (std::size_t i = 0; i < pts.size() && budget_left(); ++i) {
            if (i == lo) continue;
            pts[i] = pts[lo] + 0.5 * (pts[i] - pts[lo]);
            vals[i] = eval(pts[i]);
        }
    }
    return best;
}

}  // namespace qrebal
