#include "gsrcpd/ingest.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace gsrcpd {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view cell) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || end != cell.data() + cell.size() || cell.empty()) return std::nullopt;
    return value;
}

std::vector<std::string_view> split_cells(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

IngestError::IngestError(std::size_t line, const std::string& message)
    : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

ObservationReader::ObservationReader(std::istream& in, InputFormat format) : in_(in), format_(format) {}

std::optional<Observation> ObservationReader::next() {
    std::string text;
    while (std::getline(in_, text)) {
        ++line_;
        if (trim(text).empty()) continue;
        if (format_ == InputFormat::Auto) {
            format_ = trim(text).front() == '[' ? InputFormat::Jsonl : InputFormat::Csv;
        }
        if (format_ == InputFormat::Jsonl) return parse_jsonl(text);
        if (auto y = parse_csv(text)) return y;
    }
    return std::nullopt;
}

Observation ObservationReader::fix_dimension(std::vector<double> values) {
    for (std::size_t c = 0; c < values.size(); ++c) {
        if (!std::isfinite(values[c])) {
            throw IngestError(line_, "non-finite value in column " + std::to_string(c + 1));
        }
    }
    if (values.empty()) throw IngestError(line_, "empty record");
    if (!seen_record_) {
        dimension_ = values.size();
        seen_record_ = true;
    } else if (values.size() != dimension_) {
        throw IngestError(line_, "expected " + std::to_string(dimension_) + " values, found " +
                                     std::to_string(values.size()));
    }
    return Observation(std::move(values));
}

std::optional<Observation> ObservationReader::parse_csv(const std::string& text) {
    const auto cells = split_cells(text);
    std::vector<double> values;
    values.reserve(cells.size());
    std::size_t bad = 0;
    std::size_t first_bad = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (const auto v = parse_number(cells[c])) {
            values.push_back(*v);
        } else {
            if (bad++ == 0) first_bad = c;
        }
    }
    // A leading row of names is a header; it only counts before any record.
    if (!seen_record_ && bad == cells.size() && dimension_ == 0) {
        dimension_ = cells.size();
        return std::nullopt;
    }
    if (bad > 0) {
        throw IngestError(line_, "non-numeric cell '" + std::string(trim(cells[first_bad])) + "' in column " +
                                     std::to_string(first_bad + 1));
    }
    return fix_dimension(std::move(values));
}

Observation ObservationReader::parse_jsonl(const std::string& text) {
    nlohmann::json row;
    try {
        row = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IngestError(line_, std::string("invalid JSON: ") + e.what());
    }
    if (!row.is_array()) throw IngestError(line_, "expected a JSON array");
    std::vector<double> values;
    values.reserve(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (!row[c].is_number()) {
            throw IngestError(line_, "non-numeric cell in column " + std::to_string(c + 1));
        }
        values.push_back(row[c].get<double>());
    }
    return fix_dimension(std::move(values));
}

std::vector<Observation> read_observations(std::istream& in, InputFormat format) {
    ObservationReader reader(in, format);
    std::vector<Observation> out;
    while (auto y = reader.next()) out.push_back(std::move(*y));
    return out;
}

void write_csv(std::ostream& out, std::span<const Observation> observations) {
    for (const auto& y : observations) {
        for (std::size_t c = 0; c < y.dimension(); ++c) {
            if (c) out << ',';
            out << format_double(y[c]);
        }
        out << '\n';
    }
}

void write_jsonl(std::ostream& out, std::span<const Observation> observations) {
    for (const auto& y : observations) {
        out << '[';
        for (std::size_t c = 0; c < y.dimension(); ++c) {
            if (c) out << ',';
            out << format_double(y[c]);
        }
        out << "]\n";
    }
}

}  // namespace gsrcpd
