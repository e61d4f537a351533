#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "wavetwin/fft.hpp"

using namespace wavetwin;
using oracles::cplx;

namespace {
std::vector<double> random_samples(std::size_t n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(n);
    for (auto& v : x) v = dist(gen);
    return x;
}
} // namespace

TEST_CASE("rfft_half matches direct-summation DFT") {
    for (std::size_t n : {std::size_t{4}, std::size_t{8}, std::size_t{64},
                          std::size_t{256}, std::size_t{512}}) {
        const auto x = random_samples(n, static_cast<unsigned>(n));
        const auto fast = fft::rfft_half(x);
        const auto slow = oracles::naive_dft(x);
        REQUIRE(fast.size() == n / 2 + 1);
        for (std::size_t k = 0; k <= n / 2; ++k) {
            CAPTURE(n, k);
            CHECK_THAT(fast[k].real(), Catch::Matchers::WithinAbs(slow[k].real(), 1e-9));
            CHECK_THAT(fast[k].imag(), Catch::Matchers::WithinAbs(slow[k].imag(), 1e-9));
        }
    }
}

TEST_CASE("rfft_half keeps the DC and Nyquist bins exactly real") {
    const auto x = random_samples(128, 7);
    const auto f = fft::rfft_half(x);
    CHECK(f.front().imag() == 0.0);
    CHECK(f.back().imag() == 0.0);
}

TEST_CASE("irfft_half inverts rfft_half up to the size factor") {
    for (std::size_t n : {std::size_t{2}, std::size_t{4}, std::size_t{32},
                          std::size_t{256}, std::size_t{1024}}) {
        const auto x = random_samples(n, static_cast<unsigned>(100 + n));
        const auto spec = fft::rfft_half(x);
        const auto back = fft::irfft_half(spec, n);
        for (std::size_t j = 0; j < n; ++j) {
            CAPTURE(n, j);
            CHECK_THAT(back[j], Catch::Matchers::WithinAbs(
                                    static_cast<double>(n) * x[j], 1e-10));
        }
    }
}

TEST_CASE("unit impulse transforms to a flat spectrum") {
    std::vector<double> x(64, 0.0);
    x[0] = 1.0;
    const auto f = fft::rfft_half(x);
    for (const auto& b : f) {
        CHECK_THAT(b.real(), Catch::Matchers::WithinAbs(1.0, 1e-13));
        CHECK_THAT(b.imag(), Catch::Matchers::WithinAbs(0.0, 1e-13));
    }
}

TEST_CASE("a pure cosine lands in a single bin") {
    const std::size_t n = 128, m = 5;
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j)
        x[j] = std::cos(6.283185307179586 * static_cast<double>(m * j) /
                        static_cast<double>(n));
    const auto f = fft::rfft_half(x);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double expected = (k == m) ? static_cast<double>(n) / 2.0 : 0.0;
        CAPTURE(k);
        CHECK_THAT(f[k].real(), Catch::Matchers::WithinAbs(expected, 1e-9));
        CHECK_THAT(f[k].imag(), Catch::Matchers::WithinAbs(0.0, 1e-9));
    }
}

TEST_CASE("non-power-of-two sizes are rejected") {
    std::vector<double> x(12, 0.0);
    std::vector<cplx> out(7);
    CHECK_THROWS_AS(fft::rfft_half(x.data(), 12, out.data()), invalid_input);
    CHECK_THROWS_AS(fft::irfft_half(out.data(), 12, x.data()), invalid_input);
}

TEST_CASE("transforms are linear") {
    const std::size_t n = 256;
    const auto a = random_samples(n, 1);
    const auto b = random_samples(n, 2);
    std::vector<double> combo(n);
    for (std::size_t j = 0; j < n; ++j) combo[j] = 3.0 * a[j] - 0.5 * b[j];
    const auto fa = fft::rfft_half(a);
    const auto fb = fft::rfft_half(b);
    const auto fc = fft::rfft_half(combo);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const cplx expect = 3.0 * fa[k] - 0.5 * fb[k];
        CHECK_THAT(std::abs(fc[k] - expect), Catch::Matchers::WithinAbs(0.0, 1e-10));
    }
}
