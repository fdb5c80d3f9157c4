#include "stpbp/trace.hpp"
#include "stpbp/io_util.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace stpbp {

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_file_atomic(const std::string& path,
                       const std::function<void(std::ostream&)>& writer) {
    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        writer(out);
        out.flush();
        if (!out)
            throw std::runtime_error("write failure on " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

bool embedded_trace::conserved() const {
    if (total.size() != current.size() || total.size() != forwards.size() + 1)
        return false;
    for (size_t n = 0; n < total.size(); ++n)
        if (total[n] - current[n] != int64_t(n))
            return false;
    for (size_t n = 1; n < total.size(); ++n)
        if (total[n] != total[n - 1] + forwards[n - 1])
            return false;
    return true;
}

path_class classify_path(const embedded_trace& t, int64_t viral_threshold) {
    if (viral_threshold < 1)
        throw std::invalid_argument("classify_path: threshold must be >= 1");
    int64_t peak = 0;
    for (int64_t c : t.current)
        peak = std::max(peak, c);
    return peak > viral_threshold ? path_class::viral : path_class::extinct;
}

void write_trace_csv(const embedded_trace& t, std::ostream& out) {
    out << "n,A,C,Gamma,tau\n";
    for (size_t n = 0; n < t.total.size(); ++n) {
        out << n << ',' << t.total[n] << ',' << t.current[n] << ',';
        if (n > 0)
            out << t.forwards[n - 1];
        out << ',' << g17(t.wake_times[n]) << '\n';
    }
    if (!out)
        throw std::runtime_error("trace write failure");
}

namespace {

int64_t parse_int_field(const std::string& s, uint64_t lineno) {
    int64_t v;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("trace parse error at line "
                                 + std::to_string(lineno));
    return v;
}

} // namespace

embedded_trace read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("trace file is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "n,A,C,Gamma,tau")
        throw std::runtime_error("trace file has unexpected header: " + line);

    embedded_trace t;
    uint64_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::string field[5];
        size_t start = 0;
        int nf = 0;
        for (size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (nf == 5)
                    throw std::runtime_error("trace parse error at line "
                                             + std::to_string(lineno));
                field[nf++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (nf != 5)
            throw std::runtime_error("trace parse error at line "
                                     + std::to_string(lineno));

        int64_t n = parse_int_field(field[0], lineno);
        if (n != int64_t(t.total.size()))
            throw std::runtime_error("trace rows out of order at line "
                                     + std::to_string(lineno));
        t.total.push_back(parse_int_field(field[1], lineno));
        t.current.push_back(parse_int_field(field[2], lineno));
        if (n == 0) {
            if (!field[3].empty())
                throw std::runtime_error("trace seed row must leave Gamma empty");
        } else {
            t.forwards.push_back(parse_int_field(field[3], lineno));
        }
        char* endp = nullptr;
        double tau = std::strtod(field[4].c_str(), &endp);
        if (endp != field[4].c_str() + field[4].size() || field[4].empty())
            throw std::runtime_error("trace parse error at line "
                                     + std::to_string(lineno));
        t.wake_times.push_back(tau);
    }
    if (t.total.empty())
        throw std::runtime_error("trace file has no rows");
    t.seed_count = t.total[0];
    t.truncated = t.current.back() > 0;
    if (!t.conserved())
        throw std::runtime_error("trace file violates conservation bookkeeping");
    return t;
}

} // namespace stpbp
