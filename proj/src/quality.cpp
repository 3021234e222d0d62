#include "qcopt/quality.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace qcopt {
namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string cell_name(const std::string& section, const std::string& model) {
    return "(section '" + section + "', model '" + model + "')";
}

void put(ScoreTable& table, const std::string& section, const std::string& model, double value) {
    if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
        std::ostringstream msg;
        msg << "score " << value << " at " << cell_name(section, model) << " is outside [0, 1]";
        throw ScoreRangeError(msg.str(), section, model);
    }
    if (!table.cells[section].emplace(model, value).second)
        throw ValidationError("duplicate score for " + cell_name(section, model));
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

ScoreTable ScoreTable::read(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    const auto ext = path.extension().string();
    try {
        if (ext == ".json") return parse_json(content);
        if (ext == ".csv") return parse_csv(content);
    } catch (const ScoreFileError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    throw ValidationError(path.string() + ": score files must end in .json or .csv");
}

ScoreTable ScoreTable::parse_json(const std::string& content) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(content);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("scores")) throw ValidationError("expected an object with a \"scores\" key");
    for (auto& [key, _] : j.items())
        if (key != "scores") throw ValidationError("unknown key \"" + key + "\"");
    const auto& scores = j.at("scores");
    if (!scores.is_object()) throw ValidationError("\"scores\" must map section ids to objects");
    ScoreTable table;
    for (auto& [section, row] : scores.items()) {
        if (!row.is_object()) throw ValidationError("scores for section '" + section + "' must be an object");
        table.cells[section];
        for (auto& [model, value] : row.items()) {
            if (!value.is_number())
                throw ScoreRangeError("score at " + cell_name(section, model) + " is not a number", section, model);
            put(table, section, model, value.get<double>());
        }
    }
    return table;
}

ScoreTable ScoreTable::parse_csv(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    std::vector<std::string> header;
    ScoreTable table;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (header.empty()) {
            header = std::move(fields);
            if (header.size() < 2) throw ValidationError("CSV header needs a label column and at least one model id");
            std::set<std::string> seen;
            for (std::size_t c = 1; c < header.size(); ++c)
                if (header[c].empty() || !seen.insert(header[c]).second)
                    throw ValidationError("CSV header has an empty or duplicate model id '" + header[c] + "'");
            continue;
        }
        if (fields.size() != header.size())
            throw ValidationError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(fields.size()));
        const std::string& section = fields[0];
        if (table.cells.count(section))
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate section '" + section + "'");
        table.cells[section];
        for (std::size_t c = 1; c < fields.size(); ++c) {
            if (fields[c].empty()) continue;  // reported as missing when matched to an instance
            double value = 0.0;
            const char* first = fields[c].data();
            const char* last = first + fields[c].size();
            auto [ptr, ec] = std::from_chars(first, last, value);
            if (ec != std::errc() || ptr != last)
                throw ScoreRangeError("score '" + fields[c] + "' at " + cell_name(section, header[c]) +
                                          " is not a number",
                                      section, header[c]);
            put(table, section, header[c], value);
        }
    }
    if (header.empty()) throw ValidationError("CSV score file is empty");
    return table;
}

Eigen::MatrixXd ScoreTable::to_matrix(const std::vector<Section>& sections,
                                      const std::vector<ModelProfile>& models) const {
    std::set<std::string> section_ids, model_ids;
    for (const auto& s : sections) section_ids.insert(s.id);
    for (const auto& m : models) model_ids.insert(m.id);
    for (const auto& [section, row] : cells) {
        if (!section_ids.count(section))
            throw UnknownIdError("score file names unknown section '" + section + "'", section, "");
        for (const auto& [model, _] : row)
            if (!model_ids.count(model))
                throw UnknownIdError("score file names unknown model '" + model + "'", section, model);
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(sections.size()), static_cast<Eigen::Index>(models.size()));
    for (std::size_t j = 0; j < sections.size(); ++j) {
        auto row = cells.find(sections[j].id);
        if (row == cells.end())
            throw MissingSectionError("no scores for section '" + sections[j].id + "'", sections[j].id, "");
        for (std::size_t i = 0; i < models.size(); ++i) {
            auto cell = row->second.find(models[i].id);
            if (cell == row->second.end())
                throw MissingScoreError("missing score at " + cell_name(sections[j].id, models[i].id),
                                        sections[j].id, models[i].id);
            out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = cell->second;
        }
    }
    return out;
}

Eigen::MatrixXd load_scores(const std::filesystem::path& path, const RoutingInstance& instance) {
    return ScoreTable::read(path).to_matrix(instance.sections(), instance.models());
}

FileScorePredictor::FileScorePredictor(ScoreTable table, std::vector<std::string> model_ids)
    : table_(std::move(table)), model_ids_(std::move(model_ids)) {}

Eigen::VectorXd FileScorePredictor::predict(const Section& section) const {
    auto row = table_.cells.find(section.id);
    if (row == table_.cells.end())
        throw MissingSectionError("no scores for section '" + section.id + "'", section.id, "");
    Eigen::VectorXd out(static_cast<Eigen::Index>(model_ids_.size()));
    for (std::size_t i = 0; i < model_ids_.size(); ++i) {
        auto cell = row->second.find(model_ids_[i]);
        if (cell == row->second.end())
            throw MissingScoreError("missing score at " + cell_name(section.id, model_ids_[i]), section.id,
                                    model_ids_[i]);
        out(static_cast<Eigen::Index>(i)) = cell->second;
    }
    return out;
}

Eigen::MatrixXd predict_scores(const ScorePredictor& predictor, const std::vector<Section>& sections) {
    const auto k = static_cast<Eigen::Index>(predictor.model_ids().size());
    Eigen::MatrixXd out(static_cast<Eigen::Index>(sections.size()), k);
    for (std::size_t j = 0; j < sections.size(); ++j) {
        Eigen::VectorXd row = predictor.predict(sections[j]);
        if (row.size() != k)
            throw StructuralError("predictor returned " + std::to_string(row.size()) + " scores for section '" +
                                  sections[j].id + "', expected " + std::to_string(k));
        out.row(static_cast<Eigen::Index>(j)) = row.transpose();
    }
    return out;
}

}  // namespace qcopt
