#pragma once

#include <map>
#include <string>
#include <vector>

#include "eval/protocol.hpp"

namespace caa::eval {

struct ColumnStat {
    double mean = 0.0;
    double stddev = 0.0; // across-run standard deviation of per-run means
};

struct TableRow {
    std::string dataset;
    std::string variant;      // machine name
    std::string interpolation; // endpoint description as in the results table
    int n_runs = 0;
    std::int64_t records_per_run = 0;
    ColumnStat d_target;
    ColumnStat d_orig;
    ColumnStat acc_m;
    std::map<std::string, ColumnStat> acc_eval;
    ColumnStat fool_rate;
    ColumnStat infeasible_rate;
};

struct ResultsTable {
    std::vector<TableRow> rows;
    std::vector<std::string> eval_names;
};

// Per-(dataset, variant) means and across-run deviations. Runs must agree on
// dataset/variant coverage; zero runs is a protocol error.
ResultsTable aggregate(const std::vector<ProtocolRun>& runs);

std::string table_to_csv(const ResultsTable& table);
std::string table_to_json(const ResultsTable& table);

// max |Acc(M) - Acc(M^Ev)| over evaluation models, keyed "dataset/variant".
std::map<std::string, double> transfer_gap(const ResultsTable& table);

} // namespace caa::eval
