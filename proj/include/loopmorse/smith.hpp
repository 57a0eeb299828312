#pragma once

#include <vector>
#include <boost/multiprecision/cpp_int.hpp>

namespace loopmorse {

using BigInt = boost::multiprecision::cpp_int;

// Dense integer matrix, row-major. Entries are exact.
struct IntMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<BigInt> a;

    IntMatrix() = default;
    IntMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0) {}

    BigInt& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const BigInt& at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

struct SmithResult {
    // nonzero diagonal entries d_1 | d_2 | ... (positive)
    std::vector<BigInt> divisors;
    int rank = 0;
};

// Smith normal form of an integer matrix (exact arithmetic).
SmithResult smith_normal_form(IntMatrix m);

struct HomologyGroup {
    long betti = 0;
    std::vector<BigInt> torsion; // elementary divisors > 1
};

// Homology of a chain complex ... -> C_{k+1} -> C_k -> C_{k-1} -> ...
// given per-degree ranks and boundary matrices d[k] : C_k -> C_{k-1}
// (d[k] has ranks[k-1] rows and ranks[k] columns; d[0] is empty).
std::vector<HomologyGroup> chain_homology(const std::vector<long>& ranks,
                                          const std::vector<IntMatrix>& boundaries);

} // namespace loopmorse
