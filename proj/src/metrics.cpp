#include "ml4c/metrics.hpp"

#include "ml4c/errors.hpp"

namespace ml4c {

EdgeConfusion edge_confusion(const Pdag& truth, const Pdag& predicted) {
    if (truth.size() != predicted.size() || truth.names() != predicted.names())
        throw NodeMismatch("edge_confusion: graphs are over different node sets");
    EdgeConfusion c;
    const int n = truth.size();
    for (NodeId a = 0; a < n; ++a) {
        for (NodeId b = a + 1; b < n; ++b) {
            const EdgeMark t = truth.mark(a, b);
            const EdgeMark p = predicted.mark(a, b);
            const bool p_directed = p == EdgeMark::Forward || p == EdgeMark::Backward;
            switch (t) {
            case EdgeMark::Forward:
            case EdgeMark::Backward:
                if (p == t)
                    ++c[1];
                else if (p_directed)
                    ++c[2];
                else if (p == EdgeMark::Undirected)
                    ++c[3];
                else
                    ++c[4];
                break;
            case EdgeMark::Undirected:
                if (p_directed)
                    ++c[5];
                else if (p == EdgeMark::Undirected)
                    ++c[6];
                else
                    ++c[7];
                break;
            case EdgeMark::None:
                if (p_directed)
                    ++c[8];
                else if (p == EdgeMark::Undirected)
                    ++c[9];
                else
                    ++c[10];
                break;
            }
        }
    }
    return c;
}

std::int64_t shd(const EdgeConfusion& c) { return c[2] + c[3] + c[4] + c[5] + c[7] + c[8] + c[9]; }

std::int64_t shd(const Pdag& truth, const Pdag& predicted) { return shd(edge_confusion(truth, predicted)); }

double edge_f1(const EdgeConfusion& c) {
    const auto truth_identifiable = c[1] + c[2] + c[3] + c[4];
    const auto predicted_identifiable = c[1] + c[2] + c[5] + c[8];
    if (truth_identifiable == 0 || predicted_identifiable == 0 || c[1] == 0)
        return 0.0;
    const double precision = static_cast<double>(c[1]) / static_cast<double>(truth_identifiable);
    const double recall = static_cast<double>(c[1]) / static_cast<double>(predicted_identifiable);
    return 2.0 * precision * recall / (precision + recall);
}

double edge_f1(const Pdag& truth, const Pdag& predicted) { return edge_f1(edge_confusion(truth, predicted)); }

double ut_f1(std::span<const int> truth_labels, std::span<const int> predicted_labels) {
    if (truth_labels.size() != predicted_labels.size())
        throw LengthMismatch("ut_f1: label vectors differ in length");
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth_labels.size(); ++i) {
        const bool t = truth_labels[i] != 0;
        const bool p = predicted_labels[i] != 0;
        tp += (t && p) ? 1 : 0;
        fp += (!t && p) ? 1 : 0;
        fn += (t && !p) ? 1 : 0;
    }
    if (tp + fp + fn == 0)
        return 1.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

} // namespace ml4c
