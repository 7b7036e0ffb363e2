#include "lmcf/linalg.hpp"

#include <algorithm>

namespace lmcf::linalg {

void sym_eigen4(const Mat4& m, std::array<double, 4>& values, Mat4& vectors) {
    Mat4 a = m;
    Mat4 v{};
    for (int i = 0; i < 4; ++i) v[i][i] = 1.0;

    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;

        for (int p = 0; p < 4; ++p) {
            for (int q = p + 1; q < 4; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 4; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 4; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 4; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::array<int, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return a[i][i] > a[j][j]; });
    Mat4 sorted_v{};
    for (int i = 0; i < 4; ++i) {
        values[i] = a[order[i]][order[i]];
        for (int k = 0; k < 4; ++k) sorted_v[k][i] = v[k][order[i]];
    }
    vectors = sorted_v;
}

double max_principal_angle(const ambient::TwoFrame& p, const ambient::TwoFrame& q) {
    // cos of the principal angles = singular values of B_p^T B_q.
    const Mat2 overlap{dot(p.a, q.a), dot(p.a, q.b), dot(p.b, q.a), dot(p.b, q.b)};
    const auto sv = singular_values(overlap);
    const double smallest = std::clamp(sv[1], -1.0, 1.0);
    return std::acos(smallest);
}

}  // namespace lmcf::linalg
