#include "falcon/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace falcon {

MatchResult hungarian_match(const CostMatrix& costs) {
    if (costs.rows == 0 || costs.cols == 0)
        throw Error(ErrorKind::ShapeMismatch, "cost matrix must be non-empty");
    if (costs.costs.size() != costs.rows * costs.cols)
        throw Error(ErrorKind::ShapeMismatch, "cost storage does not match dimensions");
    double peak = 0.0;
    for (double v : costs.costs) {
        if (!std::isfinite(v))
            throw Error(ErrorKind::NonFiniteCost, "cost matrix contains a non-finite entry");
        peak = std::max(peak, std::abs(v));
    }

    // Square working copy; padding costs exceed every real entry so real
    // pairs are always preferred, and a padded row/column adds the same
    // constant wherever it lands, leaving the real sub-assignment optimal.
    std::size_t n = std::max(costs.rows, costs.cols);
    double pad = peak + 1.0;
    std::vector<double> a(n * n, pad);
    for (std::size_t r = 0; r < costs.rows; ++r)
        for (std::size_t c = 0; c < costs.cols; ++c) a[r * n + c] = costs.at(r, c);

    const double kInf = std::numeric_limits<double>::infinity();
    // Dual potentials with shortest augmenting paths; match[j] is the row
    // assigned to column j, index 0 is the virtual unmatched slot.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            std::size_t i0 = match[j0], j1 = 0;
            double delta = kInf;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = a[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    MatchResult out;
    for (std::size_t j = 1; j <= n; ++j) {
        std::size_t r = match[j] - 1, c = j - 1;
        if (r < costs.rows && c < costs.cols)
            out.assignment.emplace_back(r, c);
    }
    std::sort(out.assignment.begin(), out.assignment.end());
    for (auto [r, c] : out.assignment) out.total_cost += costs.at(r, c);
    return out;
}

double miou(const LabelMask& pred, const LabelMask& gt, int gt_classes,
            bool many_to_one_background, int background_class) {
    if (pred.height != gt.height || pred.width != gt.width)
        throw Error(ErrorKind::ShapeMismatch, "prediction and ground truth dimensions differ");
    if (gt_classes < 1)
        throw Error(ErrorKind::InvariantViolation, "ground-truth class count must be >= 1");
    if (many_to_one_background &&
        (background_class < 0 || background_class >= gt_classes))
        throw Error(ErrorKind::BackgroundClassRequired,
                    "many-to-one merging needs a valid background class");

    std::size_t g = static_cast<std::size_t>(gt_classes);
    int pred_peak = -1;
    for (int label : pred.labels) {
        if (label < 0)
            throw Error(ErrorKind::InvariantViolation, "prediction labels must be >= 0");
        pred_peak = std::max(pred_peak, label);
    }
    for (int label : gt.labels)
        if (label < 0 || label >= gt_classes)
            throw Error(ErrorKind::InvariantViolation,
                        "ground-truth label " + std::to_string(label) + " outside [0, classes)");

    // Pixel counts per predicted label, per gt class, and per pair.
    std::size_t pk = static_cast<std::size_t>(pred_peak) + 1;
    std::vector<double> pred_count(pk, 0.0), gt_count(g, 0.0), inter(pk * g, 0.0);
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        std::size_t p = static_cast<std::size_t>(pred.labels[i]);
        std::size_t c = static_cast<std::size_t>(gt.labels[i]);
        pred_count[p] += 1.0;
        gt_count[c] += 1.0;
        inter[p * g + c] += 1.0;
    }
    std::vector<std::size_t> present;
    for (std::size_t p = 0; p < pk; ++p)
        if (pred_count[p] > 0.0) present.push_back(p);

    // Negated IoU so the minimum-cost matching maximizes overlap.
    CostMatrix negated;
    negated.rows = present.size();
    negated.cols = g;
    negated.costs.resize(negated.rows * negated.cols);
    for (std::size_t r = 0; r < present.size(); ++r) {
        std::size_t p = present[r];
        for (std::size_t c = 0; c < g; ++c) {
            double overlap = inter[p * g + c];
            double unions = pred_count[p] + gt_count[c] - overlap;
            negated.at(r, c) = unions > 0.0 ? -(overlap / unions) : 0.0;
        }
    }
    MatchResult matched = hungarian_match(negated);

    // Predicted label -> gt class; unmatched labels merge into background
    // when requested, otherwise they count against every class.
    std::vector<int> mapped(pk, -1);
    for (auto [r, c] : matched.assignment) mapped[present[r]] = static_cast<int>(c);
    if (many_to_one_background)
        for (std::size_t p : present)
            if (mapped[p] < 0) mapped[p] = background_class;

    std::vector<double> class_pred(g, 0.0), class_inter(g, 0.0);
    for (std::size_t p : present) {
        if (mapped[p] < 0) continue;
        std::size_t c = static_cast<std::size_t>(mapped[p]);
        class_pred[c] += pred_count[p];
        class_inter[c] += inter[p * g + c];
    }

    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t c = 0; c < g; ++c) {
        if (!(gt_count[c] > 0.0)) continue;
        double unions = class_pred[c] + gt_count[c] - class_inter[c];
        total += unions > 0.0 ? class_inter[c] / unions : 0.0;
        ++counted;
    }
    return counted > 0 ? total / static_cast<double>(counted) : 0.0;
}

} // namespace falcon
