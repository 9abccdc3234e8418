#include "fnce/reports.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace fnce {
namespace {

double parse_value(const std::string& s, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(where + ": unparsable number \"" + s + "\"");
    return v;
}

std::size_t parse_index(const std::string& s, const std::string& where) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(where + ": unparsable index \"" + s + "\"");
    return v;
}

}  // namespace

std::string trace_csv(const TrainTrace& trace) {
    std::ostringstream out;
    out << "step,loss,mean_sp,mean_sn,alignment,uniformity\n";
    for (const TraceRow& r : trace.rows) {
        out << r.step << "," << format_real(r.loss) << "," << format_real(r.mean_sp) << ","
            << format_real(r.mean_sn) << "," << format_real(r.alignment) << ","
            << format_real(r.uniformity) << "\n";
    }
    return std::move(out).str();
}

std::string head_csv(const ProjectionHead& head) {
    std::ostringstream out;
    out << "layer,param,row,col,value\n";
    for (std::size_t l = 0; l < head.layers.size(); ++l) {
        const Layer& lay = head.layers[l];
        for (std::size_t r = 0; r < lay.in; ++r)
            for (std::size_t c = 0; c < lay.out; ++c)
                out << l << ",w," << r << "," << c << ","
                    << format_real(lay.w[r * lay.out + c]) << "\n";
        for (std::size_t c = 0; c < lay.out; ++c)
            out << l << ",b,0," << c << "," << format_real(lay.b[c]) << "\n";
    }
    return std::move(out).str();
}

ProjectionHead parse_head_csv(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    // Shapes are inferred from the maximum indices seen per layer.
    struct Cell { std::size_t layer, row, col; bool is_w; double value; };
    std::vector<Cell> cells;
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> shapes;  // layer -> (in, out)
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != "layer,param,row,col,value")
                throw ParseError(origin + ": unexpected header \"" + line + "\"");
            continue;
        }
        const std::string where = origin + ":" + std::to_string(lineno);
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                f.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (f.size() != 5) throw ParseError(where + ": expected 5 fields");
        Cell cell;
        cell.layer = parse_index(f[0], where);
        if (f[1] == "w") cell.is_w = true;
        else if (f[1] == "b") cell.is_w = false;
        else throw ParseError(where + ": param must be w or b");
        cell.row = parse_index(f[2], where);
        cell.col = parse_index(f[3], where);
        cell.value = parse_value(f[4], where);
        auto& shape = shapes[cell.layer];
        if (cell.is_w) shape.first = std::max(shape.first, cell.row + 1);
        shape.second = std::max(shape.second, cell.col + 1);
        cells.push_back(cell);
    }
    if (shapes.empty()) throw ParseError(origin + ": no parameters");
    ProjectionHead head;
    std::size_t expect = 0;
    for (const auto& [l, shape] : shapes) {
        if (l != expect++) throw ParseError(origin + ": missing layer " + std::to_string(l - 1));
        Layer lay;
        lay.in = shape.first;
        lay.out = shape.second;
        if (lay.in == 0 || lay.out == 0)
            throw ParseError(origin + ": layer " + std::to_string(l) + " has no weights");
        lay.w.assign(lay.in * lay.out, 0.0);
        lay.b.assign(lay.out, 0.0);
        head.layers.push_back(std::move(lay));
    }
    for (const Cell& cell : cells) {
        Layer& lay = head.layers[cell.layer];
        if (cell.col >= lay.out || (cell.is_w ? cell.row >= lay.in : cell.row != 0))
            throw ParseError(origin + ": cell index out of range");
        if (cell.is_w) lay.w[cell.row * lay.out + cell.col] = cell.value;
        else lay.b[cell.col] = cell.value;
    }
    for (std::size_t l = 0; l + 1 < head.layers.size(); ++l)
        if (head.layers[l].out != head.layers[l + 1].in)
            throw ParseError(origin + ": layer " + std::to_string(l) +
                             " output width does not feed layer " + std::to_string(l + 1));
    return head;
}

ProjectionHead read_head_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_head_csv(std::move(ss).str(), path);
}

std::string eval_csv(const EvalReport& rep) {
    std::ostringstream out;
    out << "spearman,alignment,uniformity,n_pairs\n";
    out << format_real(rep.spearman) << "," << format_real(rep.alignment) << ","
        << format_real(rep.uniformity) << "," << rep.n_pairs << "\n";
    return std::move(out).str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(text.data(), std::streamsize(text.size()));
    if (!out) throw IoError("write failure on " + path);
}

}  // namespace fnce
