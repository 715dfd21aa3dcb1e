#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace edgeserve {

/// Dimensions of a per-(server, agent, model) table.
struct Shape {
    std::size_t servers = 0;
    std::size_t agents = 0;
    std::size_t models = 0;

    std::size_t size() const { return servers * agents * models; }
    std::size_t per_server() const { return agents * models; }
    std::size_t index(std::size_t n, std::size_t i, std::size_t m) const {
        return (n * agents + i) * models + m;
    }
    bool operator==(const Shape&) const = default;
};

/// Dense row-major N x I x M table.
template <class T>
class Grid {
public:
    Grid() = default;
    explicit Grid(Shape shape, T fill = T{}) : shape_(shape), data_(shape.size(), fill) {}

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }

    T& operator()(std::size_t n, std::size_t i, std::size_t m) { return data_[shape_.index(n, i, m)]; }
    const T& operator()(std::size_t n, std::size_t i, std::size_t m) const {
        return data_[shape_.index(n, i, m)];
    }
    T& operator[](std::size_t k) { return data_[k]; }
    const T& operator[](std::size_t k) const { return data_[k]; }

    std::span<T> server(std::size_t n) {
        return std::span<T>(data_).subspan(n * shape_.per_server(), shape_.per_server());
    }
    std::span<const T> server(std::size_t n) const {
        return std::span<const T>(data_).subspan(n * shape_.per_server(), shape_.per_server());
    }

    std::vector<T>& values() { return data_; }
    const std::vector<T>& values() const { return data_; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Grid&) const = default;

private:
    Shape shape_{};
    std::vector<T> data_;
};

}  // namespace edgeserve
