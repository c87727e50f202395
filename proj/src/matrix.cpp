#include "loras/matrix.hpp"

#include "loras/error.hpp"

#include <algorithm>

namespace loras {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::EmptyFile: return "EmptyFile";
        case ErrorKind::MissingColumn: return "MissingColumn";
        case ErrorKind::NonNumericCell: return "NonNumericCell";
        case ErrorKind::MoreThanTwoLabels: return "MoreThanTwoLabels";
        case ErrorKind::DegenerateLabels: return "DegenerateLabels";
        case ErrorKind::InvalidDataset: return "InvalidDataset";
        case ErrorKind::TooManyFolds: return "TooManyFolds";
        case ErrorKind::KTooLarge: return "KTooLarge";
        case ErrorKind::PerplexityTooLarge: return "PerplexityTooLarge";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::EmptyMinority: return "EmptyMinority";
        case ErrorKind::ConstraintViolated: return "ConstraintViolated";
        case ErrorKind::DofTooSmall: return "DofTooSmall";
        case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : init) {
        if (r.size() != cols_) throw Error(ErrorKind::InvalidArgument, "ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    m.rows_ = rows.size();
    m.cols_ = rows.empty() ? 0 : rows.front().size();
    m.data_.reserve(m.rows_ * m.cols_);
    for (const auto& r : rows) {
        if (r.size() != m.cols_) throw Error(ErrorKind::InvalidArgument, "ragged rows");
        m.data_.insert(m.data_.end(), r.begin(), r.end());
    }
    return m;
}

void Matrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw Error(ErrorKind::InvalidArgument, "row width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        auto src = row(idx[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

Matrix vstack(const Matrix& a, const Matrix& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    if (a.cols() != b.cols()) throw Error(ErrorKind::InvalidArgument, "vstack: column mismatch");
    Matrix out(a.rows() + b.rows(), a.cols());
    std::copy(a.values().begin(), a.values().end(), out.values().begin());
    std::copy(b.values().begin(), b.values().end(), out.values().begin() + a.values().size());
    return out;
}

}  // namespace loras
