#include "voltgrid/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace voltgrid {

namespace {

const char* csv_header = "timestamp,open,high,low,close,volume";

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::int64_t parse_timestamp(const std::string& text, std::size_t line_no) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ParseError("bad timestamp '" + text + "'", line_no);
    }
}

Fixed parse_price(const std::string& text, const char* field, std::size_t line_no) {
    try {
        return Fixed::parse(text);
    } catch (const std::exception&) {
        throw ParseError(std::string("bad ") + field + " value '" + text + "'",
                         line_no);
    }
}

Candle candle_from_fields(const std::string fields[6], std::size_t line_no) {
    Candle c;
    c.timestamp = parse_timestamp(fields[0], line_no);
    c.open = parse_price(fields[1], "open", line_no);
    c.high = parse_price(fields[2], "high", line_no);
    c.low = parse_price(fields[3], "low", line_no);
    c.close = parse_price(fields[4], "close", line_no);
    c.volume = parse_price(fields[5], "volume", line_no);
    try {
        validate_candle(c);
    } catch (const ValidationError& e) {
        throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
    return c;
}

std::vector<Candle> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != csv_header) {
        throw ParseError(std::string("expected header '") + csv_header + "'", 1);
    }
    std::vector<Candle> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        std::string fields[6];
        std::size_t field = 0, start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (field >= 6) throw ParseError("too many columns", line_no);
                fields[field++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (field != 6) throw ParseError("expected 6 columns", line_no);
        out.push_back(candle_from_fields(fields, line_no));
    }
    return out;
}

Fixed fixed_from_json(const nlohmann::json& v, const char* field,
                      std::size_t line_no) {
    try {
        if (v.is_string()) return Fixed::parse(v.get<std::string>());
        if (v.is_number_integer()) return Fixed::from_int(v.get<std::int64_t>());
        if (v.is_number_float()) return Fixed::from_double(v.get<double>());
    } catch (const std::exception&) {
    }
    throw ParseError(std::string("bad ") + field + " value", line_no);
}

std::vector<Candle> read_json_lines(std::istream& in) {
    std::vector<Candle> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        nlohmann::json row = nlohmann::json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.is_object()) {
            throw ParseError("invalid JSON object", line_no);
        }
        for (const char* key : {"timestamp", "open", "high", "low", "close", "volume"}) {
            if (!row.contains(key)) {
                throw ParseError(std::string("missing field '") + key + "'", line_no);
            }
        }
        if (!row["timestamp"].is_number_integer()) {
            throw ParseError("bad timestamp value", line_no);
        }
        Candle c;
        c.timestamp = row["timestamp"].get<std::int64_t>();
        c.open = fixed_from_json(row["open"], "open", line_no);
        c.high = fixed_from_json(row["high"], "high", line_no);
        c.low = fixed_from_json(row["low"], "low", line_no);
        c.close = fixed_from_json(row["close"], "close", line_no);
        c.volume = fixed_from_json(row["volume"], "volume", line_no);
        try {
            validate_candle(c);
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(c);
    }
    return out;
}

std::int64_t infer_interval_ms(const std::vector<Candle>& sorted) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        std::int64_t gap = sorted[i].timestamp - sorted[i - 1].timestamp;
        if (gap > 0 && gap < best) best = gap;
    }
    if (best == std::numeric_limits<std::int64_t>::max()) {
        throw ValidationError("cannot infer candle interval from fewer than two rows");
    }
    return best;
}

} // namespace

PairSeries ingest_series(std::istream& in, SeriesFormat format,
                         std::string pair_id, std::int64_t interval_s) {
    std::vector<Candle> rows =
        format == SeriesFormat::csv ? read_csv(in) : read_json_lines(in);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Candle& a, const Candle& b) {
                         return a.timestamp < b.timestamp;
                     });
    PairSeries series;
    series.pair_id = std::move(pair_id);
    std::int64_t interval_ms =
        interval_s > 0 ? interval_s * 1000 : rows.size() > 1 ? infer_interval_ms(rows)
                                                             : 60'000;
    if (interval_ms % 1000 != 0 || interval_ms <= 0) {
        throw ValidationError("candle interval must be a positive whole second");
    }
    series.interval_s = interval_ms / 1000;
    series.candles = std::move(rows);
    validate_series(series);
    return series;
}

void serialize_series(const PairSeries& series, std::ostream& out,
                      SeriesFormat format) {
    if (format == SeriesFormat::csv) {
        out << csv_header << '\n';
        for (const Candle& c : series.candles) {
            out << c.timestamp << ',' << c.open.str() << ',' << c.high.str()
                << ',' << c.low.str() << ',' << c.close.str() << ','
                << c.volume.str() << '\n';
        }
        return;
    }
    for (const Candle& c : series.candles) {
        nlohmann::ordered_json row;
        row["timestamp"] = c.timestamp;
        row["open"] = c.open.str();
        row["high"] = c.high.str();
        row["low"] = c.low.str();
        row["close"] = c.close.str();
        row["volume"] = c.volume.str();
        out << row.dump() << '\n';
    }
}

PairSeries load_series_file(const std::string& path, std::string pair_id,
                            std::int64_t interval_s) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open series file: " + path);
    SeriesFormat fmt = path.size() > 4 && path.rfind(".csv") == path.size() - 4
                           ? SeriesFormat::csv
                           : SeriesFormat::json_lines;
    return ingest_series(in, fmt, std::move(pair_id), interval_s);
}

void save_series_file(const PairSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write series file: " + path);
    SeriesFormat fmt = path.size() > 4 && path.rfind(".csv") == path.size() - 4
                           ? SeriesFormat::csv
                           : SeriesFormat::json_lines;
    serialize_series(series, out, fmt);
}

} // namespace voltgrid
