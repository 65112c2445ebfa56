// Error hierarchy shared across the library. Parse errors carry a
// 1-based row/column position (0 = not applicable).
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emint {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t row = 0, std::size_t col = 0)
        : Error(position_prefix(row, col) + msg), row_(row), col_(col) {}

    std::size_t row() const { return row_; }
    std::size_t col() const { return col_; }

private:
    static std::string position_prefix(std::size_t row, std::size_t col) {
        if (row == 0) return {};
        std::string p = "row " + std::to_string(row);
        if (col != 0) p += ", col " + std::to_string(col);
        return p + ": ";
    }

    std::size_t row_;
    std::size_t col_;
};

// Semantic rule violated (bad config value, degenerate subject, stage order).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failure (missing file, short read, unwritable directory).
class IoError : public Error {
public:
    using Error::Error;
};

// External-scorer line protocol violation or timeout.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Non-finite loss or parameter during optimization; carries epoch/batch.
class TrainingError : public Error {
public:
    TrainingError(const std::string& msg, int epoch, int batch)
        : Error(msg + " (epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ")"),
          epoch_(epoch), batch_(batch) {}

    int epoch() const { return epoch_; }
    int batch() const { return batch_; }

private:
    int epoch_;
    int batch_;
};

} // namespace emint
