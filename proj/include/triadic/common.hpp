#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace triadic {

using Timestamp = std::uint64_t;

// User and content ids live in disjoint namespaces; both are indices into a
// per-dataset IdPool, so the same token may name a user and a content node
// without colliding.
struct UserId {
    std::uint32_t v = 0;
    friend bool operator==(UserId a, UserId b) { return a.v == b.v; }
    friend bool operator!=(UserId a, UserId b) { return a.v != b.v; }
    friend bool operator<(UserId a, UserId b) { return a.v < b.v; }
};

struct ContentId {
    std::uint32_t v = 0;
    friend bool operator==(ContentId a, ContentId b) { return a.v == b.v; }
    friend bool operator!=(ContentId a, ContentId b) { return a.v != b.v; }
    friend bool operator<(ContentId a, ContentId b) { return a.v < b.v; }
};

struct UserIdHash {
    std::size_t operator()(UserId u) const { return u.v; }
};
struct ContentIdHash {
    std::size_t operator()(ContentId c) const { return c.v; }
};

// Error taxonomy. The CLI maps these onto exit codes:
//   ParseError/ValidationError -> 2 (bad input), NumericalError -> 3.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg
                                  : std::move(msg)),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularModelError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Interns string tokens to dense 32-bit ids, preserving first-seen order so
// runs over the same input are reproducible.
class IdPool {
public:
    std::uint32_t intern(std::string_view token) {
        auto it = index_.find(std::string(token));
        if (it != index_.end()) return it->second;
        auto id = static_cast<std::uint32_t>(names_.size());
        names_.emplace_back(token);
        index_.emplace(names_.back(), id);
        return id;
    }

    const std::string& name(std::uint32_t id) const { return names_.at(id); }
    std::size_t size() const { return names_.size(); }

    const std::uint32_t* find(std::string_view token) const {
        auto it = index_.find(std::string(token));
        return it == index_.end() ? nullptr : &it->second;
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

// Minimal dense row-major matrix; model/estimator code keeps plain doubles
// and leaves the heavier linear algebra to the crlb headers.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double vec_sum(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
}

// Normalizes in place; errors if the total mass is not positive.
inline void normalize(std::vector<double>& v) {
    double s = vec_sum(v);
    if (!(s > 0.0)) throw NumericalError("cannot normalize a vector with non-positive mass");
    for (double& x : v) x /= s;
}

inline bool on_simplex(const std::vector<double>& v, double tol = 1e-9) {
    double s = 0.0;
    for (double x : v) {
        if (x < -tol) return false;
        s += x;
    }
    return std::abs(s - 1.0) <= tol;
}

}  // namespace triadic
