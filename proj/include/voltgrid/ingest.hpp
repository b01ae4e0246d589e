#pragma once

#include "voltgrid/candle.hpp"

#include <iosfwd>
#include <string>

namespace voltgrid {

enum class SeriesFormat { csv, json_lines };

/// Reads candle rows, sorts them by timestamp, validates them, and returns a
/// PairSeries. `interval_s` = 0 infers the interval from the smallest
/// timestamp gap after sorting.
///
/// Throws ParseError (with the 1-based source line) on malformed rows,
/// ValidationError on OHLC violations or duplicate timestamps, and GapError
/// listing missing open times when the spacing is uneven.
PairSeries ingest_series(std::istream& in, SeriesFormat format,
                         std::string pair_id, std::int64_t interval_s = 0);

/// Writes the series in the given format; ingest_series of the output
/// reproduces the input series exactly.
void serialize_series(const PairSeries& series, std::ostream& out,
                      SeriesFormat format);

PairSeries load_series_file(const std::string& path, std::string pair_id,
                            std::int64_t interval_s = 0);
void save_series_file(const PairSeries& series, const std::string& path);

} // namespace voltgrid
