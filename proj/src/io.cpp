#include "wdro/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wdro {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

JsonNode JsonNode::object() { JsonNode n; n.kind_ = Kind::object; return n; }
JsonNode JsonNode::array() { JsonNode n; n.kind_ = Kind::array; return n; }
JsonNode JsonNode::number(double v) { JsonNode n; n.kind_ = Kind::number; n.num_ = v; return n; }
JsonNode JsonNode::integer(long long v) { JsonNode n; n.kind_ = Kind::integer; n.int_ = v; return n; }
JsonNode JsonNode::boolean(bool v) { JsonNode n; n.kind_ = Kind::boolean; n.bool_ = v; return n; }
JsonNode JsonNode::str(std::string v) { JsonNode n; n.kind_ = Kind::str; n.str_ = std::move(v); return n; }

JsonNode& JsonNode::set(const std::string& key, JsonNode v) {
    members_.emplace_back(key, std::move(v));
    return *this;
}

JsonNode& JsonNode::push(JsonNode v) {
    items_.push_back(std::move(v));
    return *this;
}

namespace {

void append_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    out += '"';
}

}  // namespace

void JsonNode::dump_to(std::string& out, int indent, int depth) const {
    const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
    switch (kind_) {
        case Kind::number:
            if (std::isnan(num_)) { out += "null"; break; }
            if (std::isinf(num_)) { out += num_ > 0 ? "\"inf\"" : "\"-inf\""; break; }
            out += fmt17(num_);
            break;
        case Kind::integer:
            out += std::to_string(int_);
            break;
        case Kind::boolean:
            out += bool_ ? "true" : "false";
            break;
        case Kind::str:
            append_escaped(out, str_);
            break;
        case Kind::object: {
            if (members_.empty()) { out += "{}"; break; }
            out += "{\n";
            for (std::size_t i = 0; i < members_.size(); ++i) {
                out += pad;
                append_escaped(out, members_[i].first);
                out += ": ";
                members_[i].second.dump_to(out, indent, depth + 1);
                if (i + 1 < members_.size()) out += ',';
                out += '\n';
            }
            out += close_pad + "}";
            break;
        }
        case Kind::array: {
            if (items_.empty()) { out += "[]"; break; }
            out += "[\n";
            for (std::size_t i = 0; i < items_.size(); ++i) {
                out += pad;
                items_[i].dump_to(out, indent, depth + 1);
                if (i + 1 < items_.size()) out += ',';
                out += '\n';
            }
            out += close_pad + "]";
            break;
        }
    }
}

std::string JsonNode::dump(int indent) const {
    std::string out;
    dump_to(out, indent, 0);
    out += '\n';
    return out;
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (table.header.empty()) {
            table.header = cells;
            continue;
        }
        Vec row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(c, &pos);
            } catch (const std::exception&) {
                throw ValidationError(origin + ":" + std::to_string(line_no) +
                                      ": cell '" + c + "' is not numeric");
            }
            if (!std::isfinite(v))
                throw ValidationError(origin + ":" + std::to_string(line_no) +
                                      ": non-finite value '" + c + "'");
            row.push_back(v);
        }
        if (row.size() != table.header.size())
            throw ValidationError(origin + ":" + std::to_string(line_no) +
                                  ": expected " + std::to_string(table.header.size()) +
                                  " columns, got " + std::to_string(row.size()));
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw ValidationError(origin + ": missing header row");
    return table;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text_file(path), path); }

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Vec>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        out += header[i];
        out += (i + 1 < header.size()) ? ',' : '\n';
    }
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += fmt17(row[i]);
            out += (i + 1 < row.size()) ? ',' : '\n';
        }
    }
    write_text_file(path, out);
}

DiscreteDistribution distribution_from_csv(const CsvTable& table) {
    if (table.header.size() < 2)
        throw ValidationError("distribution CSV needs at least one coordinate and a weight column");
    std::vector<Vec> atoms;
    Vec weights;
    for (const auto& row : table.rows) {
        atoms.emplace_back(row.begin(), row.end() - 1);
        weights.push_back(row.back());
    }
    return DiscreteDistribution(std::move(atoms), std::move(weights));
}

DiscreteDistribution samples_from_csv(const CsvTable& table) {
    if (table.rows.empty()) throw ValidationError("sample CSV has no data rows");
    return DiscreteDistribution::empirical(std::vector<Vec>(table.rows));
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw ValidationError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace wdro
