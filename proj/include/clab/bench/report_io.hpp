// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_BENCH_REPORT_IO_HPP
#define CLAB_BENCH_REPORT_IO_HPP

#include "clab/bench/experiment.hpp"

#include <filesystem>

namespace clab::bench {

void write_record_json(const RunRecord& record, const std::filesystem::path& path);
RunRecord load_record_json(const std::filesystem::path& path);

/// report.json carries the aggregated groups and their records, minus
/// wall-clock times, so identical master seeds produce identical bytes.
void write_report_json(const MetricsReport& report, const std::filesystem::path& path);
MetricsReport load_report_json(const std::filesystem::path& path);

/// One CSV per protocol under tables/: rows are variants, one column per
/// fraction, cells "mean (sd)" in percent (sd only for multi-repeat groups).
void write_tables(const MetricsReport& report, const std::filesystem::path& dir);

/// One SVG per protocol under charts/: grouped bars (x = fraction, group =
/// variant) with +/- sd error bars. Byte-deterministic for a fixed report.
void write_charts(const MetricsReport& report, const std::filesystem::path& dir);

/// Formats a metric cell, e.g. "60.05 (0.11)" or "65.39".
std::string format_cell(Scalar mean, std::optional<Scalar> sd);

/// Formats a fraction as a percent label: 0.01 -> "1%", 0.1 -> "10%".
std::string fraction_label(Scalar fraction);

} // namespace clab::bench

#endif // CLAB_BENCH_REPORT_IO_HPP
