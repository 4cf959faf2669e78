#pragma once

#include <map>
#include <string>
#include <vector>

#include "wdro/types.hpp"

namespace wdro {

// %.17g: enough digits to round-trip any double exactly.
std::string fmt17(double v);

// ---------------------------------------------------------------------------
// Minimal ordered JSON emitter. Reports must be byte-identical run to run, so
// the writer controls key order and float formatting itself.
// ---------------------------------------------------------------------------

class JsonNode {
public:
    static JsonNode object();
    static JsonNode array();
    static JsonNode number(double v);
    static JsonNode integer(long long v);
    static JsonNode boolean(bool v);
    static JsonNode str(std::string v);

    JsonNode& set(const std::string& key, JsonNode v);  // object
    JsonNode& push(JsonNode v);                         // array

    std::string dump(int indent = 2) const;

private:
    enum class Kind { object, array, number, integer, boolean, str } kind_ = Kind::object;
    double num_ = 0.0;
    long long int_ = 0;
    bool bool_ = false;
    std::string str_;
    std::vector<std::pair<std::string, JsonNode>> members_;
    std::vector<JsonNode> items_;

    void dump_to(std::string& out, int indent, int depth) const;
};

// ---------------------------------------------------------------------------
// CSV. Numeric tables with a header row; non-finite cells are rejected with
// the offending row number.
// ---------------------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<Vec> rows;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Vec>& rows);

// One atom per row, final column is the weight.
DiscreteDistribution distribution_from_csv(const CsvTable& table);
// One sample per row, uniform weights.
DiscreteDistribution samples_from_csv(const CsvTable& table);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace wdro
