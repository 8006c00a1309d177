#pragma once

#include "afem/adapt.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace afem {

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] const std::vector<std::string>& csv_columns();
void write_csv_header(std::ostream& out);
/// One row, 17 significant digits, empty cells for absent errors.
void write_csv_row(std::ostream& out, const AdaptRecord& record);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::optional<double>>> rows;

    /// Values of a column; throws CsvError if the column is missing.
    [[nodiscard]] std::vector<std::optional<double>> column(const std::string& name) const;
};

/// Throws CsvError on non-numeric cells or ragged rows.
[[nodiscard]] CsvTable read_csv(std::istream& in);
[[nodiscard]] CsvTable read_csv_file(const std::string& path);

/// Least-squares slope of log(value) against log(n), sign-flipped, so that
/// value ~ n^{-s} gives s.
[[nodiscard]] double fit_rate(std::span<const double> n, std::span<const double> value);

/// First index of the trailing `fraction` of the rows (at least 4 rows).
[[nodiscard]] std::size_t tail_start_fraction(std::size_t rows, double fraction);
/// First index i with n[i] >= n.back() / 10.
[[nodiscard]] std::size_t tail_start_decade(std::span<const double> n);

/// Rate of `column` against n_elem over the trailing fraction of the rows.
/// Rows with an empty cell are skipped. Throws CsvError with fewer than 4 rows.
[[nodiscard]] double csv_rate(const CsvTable& table, const std::string& column, double fraction);

} // namespace afem
