#pragma once

#include <cassert>
#include <cstddef>
#include <random>
#include <vector>

namespace comet {

// Dense double-precision matrix; vectors are n x 1.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    static Tensor zeros(int r, int c = 1) { return Tensor(r, c); }

    double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
    double& operator[](int i) { return data[i]; }
    double operator[](int i) const { return data[i]; }

    int size() const { return static_cast<int>(data.size()); }
    bool is_vector() const { return cols == 1; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    void uniform_init(std::mt19937_64& rng, double lo, double hi) {
        std::uniform_real_distribution<double> dist(lo, hi);
        for (double& v : data) v = dist(rng);
    }
};

}  // namespace comet
