// Computes the Maslov index of a Mathieu-type Hill system
//     x'' + (a + b cos(2 pi t / T)) x = 0
// for a small grid of (a, b) and prints the index table.

#include <cstdio>

#include "pbm/second_order.hpp"

int main() {
    const double T = pbm::kPi;
    std::printf("Maslov index of x'' + (a + b cos(2 pi t / T)) x = 0, T = pi\n");
    std::printf("%8s", "a \\ b");
    for (double b : {0.0, 0.2, 0.4}) std::printf("%10.1f", b);
    std::printf("\n");
    for (double a : {-1.0, -0.5, 0.5, 1.0, 2.0, 4.5}) {
        std::printf("%8.1f", a);
        for (double b : {0.0, 0.2, 0.4}) {
            pbm::MaslovIndex idx = pbm::index_of_hill(
                [a, b, T](double t) { return a + b * std::cos(2.0 * pbm::kPi * t / T); }, T);
            std::printf("    %ld (%d)", idx.index, idx.nullity);
        }
        std::printf("\n");
    }
    return 0;
}
