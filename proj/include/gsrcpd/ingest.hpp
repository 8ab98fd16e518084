#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gsrcpd/core.hpp"

namespace gsrcpd {

// Malformed input; `line` is 1-based.
class IngestError : public Error {
public:
    IngestError(std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

enum class InputFormat { Auto, Csv, Jsonl };

// Incremental reader for CSV (numeric columns, optional header row) or
// JSON lines (one array per line). Auto picks JSON lines when the first
// non-blank line starts with '['. Blank lines are skipped. The first record
// fixes the dimension.
class ObservationReader {
public:
    explicit ObservationReader(std::istream& in, InputFormat format = InputFormat::Auto);

    std::optional<Observation> next();
    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::optional<Observation> parse_csv(const std::string& text);
    Observation parse_jsonl(const std::string& text);
    Observation fix_dimension(std::vector<double> values);

    std::istream& in_;
    InputFormat format_;
    std::size_t line_ = 0;
    std::size_t dimension_ = 0;
    bool seen_record_ = false;
};

std::vector<Observation> read_observations(std::istream& in, InputFormat format = InputFormat::Auto);

// %.17g, so reading the output back yields identical doubles.
void write_csv(std::ostream& out, std::span<const Observation> observations);
void write_jsonl(std::ostream& out, std::span<const Observation> observations);

}  // namespace gsrcpd
