/*
 * Copyright 2026 The jumpgp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "jgp/harness.hpp"

namespace jgp {

const char* const kTraceHeader = "rep,stage,N,criterion,x_coords,y_obs,rmse,nlpd,elapsed_ms";

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') {
        throw std::invalid_argument("trace CSV: bad number '" + s + "' on line " + std::to_string(line));
    }
    return v;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

void write_trace_csv(std::ostream& out, const AlTrace& trace) {
    out << kTraceHeader << '\n';
    for (const auto& r : trace.rows) {
        out << r.rep << ',' << r.stage << ',' << r.n << ',' << to_string(r.criterion) << ',';
        for (Eigen::Index c = 0; c < r.x.size(); ++c) {
            if (c) out << ';';
            out << format_double(r.x(c));
        }
        out << ',' << format_double(r.y_obs) << ',' << format_double(r.rmse) << ',' << format_double(r.nlpd)
            << ',' << format_double(r.elapsed_ms) << '\n';
    }
    if (trace.error) out << "# error: " << *trace.error << '\n';
}

AlTrace read_trace_csv(std::istream& in) {
    AlTrace t;
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader) {
        throw std::invalid_argument("trace CSV: header must be exactly " + std::string(kTraceHeader));
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.rfind("# error: ", 0) == 0) {
            t.error = line.substr(9);
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 9) throw std::invalid_argument("trace CSV: wrong field count on line " + std::to_string(lineno));
        TraceRow r;
        r.rep = static_cast<int>(parse_number(f[0], lineno));
        r.stage = static_cast<int>(parse_number(f[1], lineno));
        r.n = static_cast<Eigen::Index>(parse_number(f[2], lineno));
        r.criterion = parse_criterion(f[3]);
        if (!f[4].empty()) {
            const auto xs = split(f[4], ';');
            r.x.resize(static_cast<Eigen::Index>(xs.size()));
            for (std::size_t c = 0; c < xs.size(); ++c) r.x(static_cast<Eigen::Index>(c)) = parse_number(xs[c], lineno);
        }
        r.y_obs = parse_number(f[5], lineno);
        r.rmse = parse_number(f[6], lineno);
        r.nlpd = parse_number(f[7], lineno);
        r.elapsed_ms = parse_number(f[8], lineno);
        t.rows.push_back(std::move(r));
    }
    return t;
}

Report make_report(const std::vector<AlTrace>& traces, const std::vector<std::string>& labels) {
    if (!labels.empty() && labels.size() != traces.size()) {
        throw std::invalid_argument("make_report: one label per trace is required");
    }
    // (label, rep, stage) -> last row of that stage.
    std::map<std::tuple<std::string, int, int>, const TraceRow*> last;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        for (const auto& r : traces[i].rows) {
            const std::string name = labels.empty() ? to_string(r.criterion) : labels[i];
            last[{name, r.rep, r.stage}] = &r;
        }
    }
    Report rep;
    std::map<std::pair<std::string, int>, std::vector<const TraceRow*>> by_stage;
    std::set<std::string> crit;
    for (const auto& [key, row] : last) {
        by_stage[{std::get<0>(key), std::get<2>(key)}].push_back(row);
        crit.insert(std::get<0>(key));
    }
    for (const auto& [key, rows] : by_stage) {
        std::vector<double> rm;
        std::vector<double> nl;
        for (const auto* r : rows) {
            if (!std::isnan(r->rmse)) rm.push_back(r->rmse);
            if (!std::isnan(r->nlpd)) nl.push_back(r->nlpd);
        }
        if (rm.empty()) continue;
        Report::Line line;
        line.criterion = key.first;
        line.stage = key.second;
        line.n = rows.front()->n;
        line.reps = static_cast<int>(rm.size());
        line.rmse_mean = mean_of(rm);
        double ss = 0.0;
        for (double v : rm) ss += (v - line.rmse_mean) * (v - line.rmse_mean);
        line.rmse_sd = rm.size() > 1 ? std::sqrt(ss / static_cast<double>(rm.size() - 1)) : 0.0;
        line.nlpd_mean = nl.empty() ? std::nan("") : mean_of(nl);
        rep.summary.push_back(line);
    }

    rep.criteria.assign(crit.begin(), crit.end());
    const auto k = static_cast<Eigen::Index>(rep.criteria.size());
    rep.p_values = Matrix::Constant(k, k, std::nan(""));
    rep.rmse_diff = Matrix::Constant(k, k, std::nan(""));
    // Final-stage RMSE per criterion and rep.
    std::map<std::string, std::map<int, double>> final_rmse;
    for (const auto& name : rep.criteria) {
        int final_stage = -1;
        for (const auto& [key, row] : last) {
            if (std::get<0>(key) == name) final_stage = std::max(final_stage, std::get<2>(key));
        }
        for (const auto& [key, row] : last) {
            if (std::get<0>(key) == name && std::get<2>(key) == final_stage && !std::isnan(row->rmse)) {
                final_rmse[name][std::get<1>(key)] = row->rmse;
            }
        }
    }
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            if (i == j) continue;
            const auto& a = final_rmse[rep.criteria[static_cast<std::size_t>(i)]];
            const auto& b = final_rmse[rep.criteria[static_cast<std::size_t>(j)]];
            std::vector<double> va;
            std::vector<double> vb;
            for (const auto& [r, v] : a) {
                if (auto it = b.find(r); it != b.end()) {
                    va.push_back(v);
                    vb.push_back(it->second);
                }
            }
            if (va.empty()) continue;
            Vector x = Eigen::Map<Vector>(va.data(), static_cast<Eigen::Index>(va.size()));
            Vector y = Eigen::Map<Vector>(vb.data(), static_cast<Eigen::Index>(vb.size()));
            rep.rmse_diff(i, j) = (x - y).mean();
            if (va.size() >= 5) rep.p_values(i, j) = wilcoxon_signed_rank(x, y);
        }
    }
    return rep;
}

void write_report_summary_csv(std::ostream& out, const Report& report) {
    out << "criterion,stage,N,reps,rmse_mean,rmse_sd,nlpd_mean\n";
    for (const auto& l : report.summary) {
        out << l.criterion << ',' << l.stage << ',' << l.n << ',' << l.reps << ',' << format_double(l.rmse_mean)
            << ',' << format_double(l.rmse_sd) << ',' << format_double(l.nlpd_mean) << '\n';
    }
}

void write_report_pvalues_csv(std::ostream& out, const Report& report) {
    out << "row,column,p_value,mean_rmse_diff\n";
    const auto k = static_cast<Eigen::Index>(report.criteria.size());
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            if (i == j) continue;
            out << report.criteria[static_cast<std::size_t>(i)] << ',' << report.criteria[static_cast<std::size_t>(j)]
                << ',' << format_double(report.p_values(i, j)) << ',' << format_double(report.rmse_diff(i, j)) << '\n';
        }
    }
}

}  // namespace jgp
