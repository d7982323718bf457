#include "eval/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "core/error.hpp"

namespace caa::eval {

using json = nlohmann::json;

namespace {

struct RunMeans {
    double d_target = 0.0, d_orig = 0.0, acc_m = 0.0, fool = 0.0, infeasible = 0.0;
    std::map<std::string, double> acc_eval;
    std::int64_t n = 0;
};

RunMeans means_of(const VariantRun& vr) {
    RunMeans m;
    m.n = std::int64_t(vr.records.size());
    if (m.n == 0) raise(ErrorKind::Protocol, "variant run contains no records");
    for (const auto& r : vr.records) {
        m.d_target += r.d_target;
        m.d_orig += r.d_orig;
        m.acc_m += r.correct ? 1.0 : 0.0;
        m.fool += r.fooled ? 1.0 : 0.0;
        m.infeasible += r.feasible ? 0.0 : 1.0;
    }
    m.d_target /= double(m.n);
    m.d_orig /= double(m.n);
    m.acc_m /= double(m.n);
    m.fool /= double(m.n);
    m.infeasible /= double(m.n);
    for (const auto& [name, preds] : vr.eval_preds) {
        if (std::int64_t(preds.size()) != m.n)
            raise(ErrorKind::Protocol, "evaluation predictions misaligned with records");
        double acc = 0.0;
        for (std::size_t i = 0; i < preds.size(); ++i)
            if (preds[i] == vr.records[i].orig_label) acc += 1.0;
        m.acc_eval[name] = acc / double(m.n);
    }
    return m;
}

ColumnStat stat_of(const std::vector<double>& xs) {
    ColumnStat s;
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= double(xs.size());
    if (xs.size() > 1) {
        double acc = 0.0;
        for (double x : xs) acc += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(acc / double(xs.size() - 1));
    }
    return s;
}

} // namespace

ResultsTable aggregate(const std::vector<ProtocolRun>& runs) {
    if (runs.empty()) raise(ErrorKind::Protocol, "aggregate needs at least one run");

    // dataset -> variant -> per-run means
    std::map<std::string, std::map<std::string, std::vector<RunMeans>>> bucket;
    std::vector<std::string> dataset_order;
    for (const auto& run : runs) {
        if (!bucket.count(run.dataset)) dataset_order.push_back(run.dataset);
        for (const auto& vr : run.variants)
            bucket[run.dataset][attack::variant_name(vr.variant)].push_back(means_of(vr));
    }

    ResultsTable table;
    for (const auto& run : runs)
        for (const auto& [name, hash] : run.eval_hashes)
            if (std::find(table.eval_names.begin(), table.eval_names.end(), name) ==
                table.eval_names.end())
                table.eval_names.push_back(name);

    // rows in the presentation order of the quantitative results table
    const attack::PipelineVariant order[] = {
        attack::PipelineVariant::Image, attack::PipelineVariant::Cls,
        attack::PipelineVariant::AeToDenoised, attack::PipelineVariant::AeFromDenoised};

    for (const auto& ds : dataset_order) {
        for (auto variant : order) {
            const std::string vname = attack::variant_name(variant);
            auto it = bucket[ds].find(vname);
            if (it == bucket[ds].end()) continue;
            const auto& rms = it->second;

            TableRow row;
            row.dataset = ds;
            row.variant = vname;
            row.interpolation = attack::variant_label(variant);
            row.n_runs = int(rms.size());
            row.records_per_run = rms.front().n;

            auto collect = [&](auto getter) {
                std::vector<double> xs;
                for (const auto& rm : rms) xs.push_back(getter(rm));
                return stat_of(xs);
            };
            row.d_target = collect([](const RunMeans& m) { return m.d_target; });
            row.d_orig = collect([](const RunMeans& m) { return m.d_orig; });
            row.acc_m = collect([](const RunMeans& m) { return m.acc_m; });
            row.fool_rate = collect([](const RunMeans& m) { return m.fool; });
            row.infeasible_rate = collect([](const RunMeans& m) { return m.infeasible; });
            for (const auto& name : table.eval_names) {
                std::vector<double> xs;
                for (const auto& rm : rms) {
                    auto eit = rm.acc_eval.find(name);
                    if (eit != rm.acc_eval.end()) xs.push_back(eit->second);
                }
                if (!xs.empty()) row.acc_eval[name] = stat_of(xs);
            }
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

std::string table_to_csv(const ResultsTable& table) {
    std::ostringstream os;
    os << "dataset,interpolation,dist_target_mean,dist_target_std,dist_orig_mean,"
          "dist_orig_std,acc_m_mean,acc_m_std";
    for (const auto& name : table.eval_names)
        os << ",acc_" << name << "_mean,acc_" << name << "_std";
    os << ",fool_rate_mean,fool_rate_std,infeasible_rate_mean,infeasible_rate_std,n_runs,"
          "records_per_run\n";
    os.setf(std::ios::fixed);
    os.precision(6);
    for (const auto& r : table.rows) {
        os << r.dataset << ",\"" << r.interpolation << "\"," << r.d_target.mean << ","
           << r.d_target.stddev << "," << r.d_orig.mean << "," << r.d_orig.stddev << ","
           << r.acc_m.mean << "," << r.acc_m.stddev;
        for (const auto& name : table.eval_names) {
            auto it = r.acc_eval.find(name);
            if (it != r.acc_eval.end())
                os << "," << it->second.mean << "," << it->second.stddev;
            else
                os << ",,";
        }
        os << "," << r.fool_rate.mean << "," << r.fool_rate.stddev << ","
           << r.infeasible_rate.mean << "," << r.infeasible_rate.stddev << "," << r.n_runs
           << "," << r.records_per_run << "\n";
    }
    return os.str();
}

std::string table_to_json(const ResultsTable& table) {
    json j;
    j["eval_models"] = table.eval_names;
    json rows = json::array();
    for (const auto& r : table.rows) {
        json row;
        row["dataset"] = r.dataset;
        row["variant"] = r.variant;
        row["interpolation"] = r.interpolation;
        row["n_runs"] = r.n_runs;
        row["records_per_run"] = r.records_per_run;
        auto put = [&row](const char* key, const ColumnStat& s) {
            row[key] = {{"mean", s.mean}, {"std", s.stddev}};
        };
        put("dist_to_target", r.d_target);
        put("dist_to_original", r.d_orig);
        put("acc_m", r.acc_m);
        put("fool_rate", r.fool_rate);
        put("infeasible_rate", r.infeasible_rate);
        json acc_eval;
        for (const auto& [name, s] : r.acc_eval)
            acc_eval[name] = {{"mean", s.mean}, {"std", s.stddev}};
        row["acc_eval"] = acc_eval;
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j.dump(2);
}

std::map<std::string, double> transfer_gap(const ResultsTable& table) {
    bool any_eval = false;
    for (const auto& r : table.rows)
        if (!r.acc_eval.empty()) any_eval = true;
    if (!any_eval)
        raise(ErrorKind::Protocol, "transfer gap requires at least one evaluation model");

    std::map<std::string, double> gaps;
    for (const auto& r : table.rows) {
        double gap = 0.0;
        for (const auto& [name, s] : r.acc_eval)
            gap = std::max(gap, std::fabs(r.acc_m.mean - s.mean));
        gaps[r.dataset + "/" + r.variant] = gap;
    }
    return gaps;
}

} // namespace caa::eval
