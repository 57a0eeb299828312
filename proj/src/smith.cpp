#include "loopmorse/smith.hpp"

#include <cstdlib>
#include <stdexcept>

namespace loopmorse {

namespace {

BigInt abs_big(const BigInt& x) { return x < 0 ? BigInt(-x) : x; }

// locate the nonzero entry of smallest magnitude in m[r..,c..]
bool find_pivot(const IntMatrix& m, int r0, int c0, int& pi, int& pj) {
    bool found = false;
    BigInt best = 0;
    for (int i = r0; i < m.rows; ++i)
        for (int j = c0; j < m.cols; ++j) {
            const BigInt& v = m.at(i, j);
            if (v == 0) continue;
            BigInt av = abs_big(v);
            if (!found || av < best) {
                found = true;
                best = av;
                pi = i;
                pj = j;
            }
        }
    return found;
}

void swap_rows(IntMatrix& m, int a, int b) {
    if (a == b) return;
    for (int j = 0; j < m.cols; ++j) std::swap(m.at(a, j), m.at(b, j));
}

void swap_cols(IntMatrix& m, int a, int b) {
    if (a == b) return;
    for (int i = 0; i < m.rows; ++i) std::swap(m.at(i, a), m.at(i, b));
}

} // namespace

SmithResult smith_normal_form(IntMatrix m) {
    SmithResult out;
    int t = 0; // current diagonal slot
    const int limit = std::min(m.rows, m.cols);
    while (t < limit) {
        int pi, pj;
        if (!find_pivot(m, t, t, pi, pj)) break;
        swap_rows(m, t, pi);
        swap_cols(m, t, pj);

        // clear row and column t; the minimal-pivot choice makes this terminate
        bool dirty = true;
        while (dirty) {
            dirty = false;
            for (int i = t + 1; i < m.rows; ++i) {
                if (m.at(i, t) == 0) continue;
                BigInt q = m.at(i, t) / m.at(t, t);
                for (int j = t; j < m.cols; ++j) m.at(i, j) -= q * m.at(t, j);
                if (m.at(i, t) != 0) { // remainder became the smaller pivot
                    swap_rows(m, t, i);
                    dirty = true;
                }
            }
            for (int j = t + 1; j < m.cols; ++j) {
                if (m.at(t, j) == 0) continue;
                BigInt q = m.at(t, j) / m.at(t, t);
                for (int i = t; i < m.rows; ++i) m.at(i, j) -= q * m.at(i, t);
                if (m.at(t, j) != 0) {
                    swap_cols(m, t, j);
                    dirty = true;
                }
            }
        }
        ++t;
    }

    // enforce the divisibility chain d_k | d_{k+1}
    for (int i = 0; i + 1 < t; ++i) {
        for (int j = i + 1; j < t; ++j) {
            if (m.at(j, j) % m.at(i, i) == 0) continue;
            // gcd trick: fold entry (j,j) into column i, re-reduce the 2x2 block
            BigInt a = m.at(i, i), b = m.at(j, j);
            BigInt g = gcd(a, b);
            BigInt l = a / g * b;
            m.at(i, i) = g;
            m.at(j, j) = l;
        }
    }

    out.rank = t;
    for (int i = 0; i < t; ++i) out.divisors.push_back(abs_big(m.at(i, i)));
    return out;
}

std::vector<HomologyGroup> chain_homology(const std::vector<long>& ranks,
                                          const std::vector<IntMatrix>& boundaries) {
    const size_t deg = ranks.size();
    if (boundaries.size() != deg)
        throw std::invalid_argument("chain_homology: one boundary matrix per degree expected");
    std::vector<SmithResult> snf(deg);
    for (size_t k = 0; k < deg; ++k) {
        if (k == 0 || boundaries[k].rows == 0 || boundaries[k].cols == 0) {
            snf[k] = SmithResult{};
        } else {
            if (boundaries[k].cols != ranks[k] || boundaries[k].rows != ranks[k - 1])
                throw std::invalid_argument("chain_homology: boundary shape mismatch");
            snf[k] = smith_normal_form(boundaries[k]);
        }
    }
    std::vector<HomologyGroup> h(deg);
    for (size_t k = 0; k < deg; ++k) {
        long rank_dk = snf[k].rank;
        long rank_dk1 = (k + 1 < deg) ? snf[k + 1].rank : 0;
        h[k].betti = ranks[k] - rank_dk - rank_dk1;
        if (k + 1 < deg)
            for (const BigInt& d : snf[k + 1].divisors)
                if (d > 1) h[k].torsion.push_back(d);
    }
    return h;
}

} // namespace loopmorse
