#include "mns/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mns {

namespace {

using nlohmann::json;

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

[[noreturn]] void bad_file(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

std::string next_token(std::istream& in, const std::string& path, const char* what) {
    std::string tok;
    if (!(in >> tok)) bad_file(path, std::string("unexpected end of file reading ") + what);
    return tok;
}

double next_double(std::istream& in, const std::string& path, const char* what) {
    return parse_double(next_token(in, path, what));
}

long next_long(std::istream& in, const std::string& path, const char* what) {
    const std::string tok = next_token(in, path, what);
    try {
        return std::stol(tok);
    } catch (const std::exception&) {
        bad_file(path, std::string("expected integer for ") + what + ", got '" + tok + "'");
    }
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (double v : m.row(i)) row.push_back(v);
        rows.push_back(std::move(row));
    }
    return rows;
}

json curves_to_json(const std::vector<EpochRecord>& curves) {
    json arr = json::array();
    for (const auto& r : curves) {
        arr.push_back({{"train_loss", r.train_loss},
                       {"val_loss", r.val_loss},
                       {"val_pair_error", r.val_pair_error},
                       {"val_pair_error_argmax", r.val_pair_error_argmax},
                       {"learning_rate", r.learning_rate}});
    }
    return arr;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::runtime_error("not a number: '" + s + "'");
    return v;
}

void write_dataset(const std::string& path, const LabeledDataset& data) {
    data.validate();
    auto out = open_out(path);
    out << data.size() << ' ' << data.dim() << ' ' << data.num_classes << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double v : data.X.row(i)) out << format_double(v) << ' ';
        out << data.labels[i] << '\n';
    }
}

LabeledDataset read_dataset(const std::string& path) {
    auto in = open_in(path);
    const long n = next_long(in, path, "n");
    const long dim = next_long(in, path, "dim");
    const long c = next_long(in, path, "C");
    if (n < 1 || dim < 1 || c < 1) bad_file(path, "invalid dataset header");
    LabeledDataset data;
    data.X = Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(dim));
    data.labels.resize(static_cast<std::size_t>(n));
    data.num_classes = static_cast<std::size_t>(c);
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < dim; ++j)
            data.X(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                next_double(in, path, "feature");
        data.labels[static_cast<std::size_t>(i)] =
            static_cast<int>(next_long(in, path, "label"));
    }
    data.validate();
    return data;
}

void write_transition(const std::string& path, const TransitionMatrix& t) {
    auto out = open_out(path);
    out << t.num_classes() << '\n';
    for (std::size_t i = 0; i < t.num_classes(); ++i) {
        for (std::size_t j = 0; j < t.num_classes(); ++j)
            out << format_double(t(i, j)) << (j + 1 < t.num_classes() ? ' ' : '\n');
    }
}

TransitionMatrix read_transition(const std::string& path) {
    auto in = open_in(path);
    const long c = next_long(in, path, "C");
    if (c < 1) bad_file(path, "invalid class count");
    Matrix m(static_cast<std::size_t>(c), static_cast<std::size_t>(c));
    for (long i = 0; i < c; ++i)
        for (long j = 0; j < c; ++j)
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                next_double(in, path, "entry");
    return TransitionMatrix::from_matrix(std::move(m));
}

void write_transition_csv(const std::string& path, const TransitionMatrix& t) {
    auto out = open_out(path);
    out << "row,col,value\n";
    for (std::size_t i = 0; i < t.num_classes(); ++i)
        for (std::size_t j = 0; j < t.num_classes(); ++j)
            out << i + 1 << ',' << j + 1 << ',' << format_double(t(i, j)) << '\n';
}

void write_pairs(const std::string& path, const SimilarityPairBatch& pairs) {
    auto out = open_out(path);
    out << pairs.pairs.size() << '\n';
    for (const auto& p : pairs.pairs) out << p.a << ' ' << p.b << ' ' << p.s << '\n';
}

SimilarityPairBatch read_pairs(const std::string& path) {
    auto in = open_in(path);
    const long n = next_long(in, path, "pair count");
    if (n < 0) bad_file(path, "negative pair count");
    SimilarityPairBatch batch;
    batch.pairs.resize(static_cast<std::size_t>(n));
    for (auto& p : batch.pairs) {
        p.a = static_cast<std::size_t>(next_long(in, path, "index a"));
        p.b = static_cast<std::size_t>(next_long(in, path, "index b"));
        p.s = static_cast<int>(next_long(in, path, "similarity"));
        if (p.a >= p.b || (p.s != 0 && p.s != 1)) bad_file(path, "malformed pair");
    }
    return batch;
}

void write_checkpoint(const std::string& path, const MlpModel& model) {
    auto out = open_out(path);
    out << "mns-checkpoint 1\n";
    out << "activation " << activation_name(model.activation()) << '\n';
    out << "layers " << model.depth() << '\n';
    for (const auto& l : model.layers()) {
        out << "layer " << l.weight.rows() << ' ' << l.weight.cols() << ' '
            << (l.has_bias() ? "bias" : "nobias") << '\n';
        for (std::size_t r = 0; r < l.weight.rows(); ++r) {
            const auto row = l.weight.row(r);
            for (std::size_t ci = 0; ci < row.size(); ++ci)
                out << format_double(row[ci]) << (ci + 1 < row.size() ? ' ' : '\n');
        }
        if (l.has_bias()) {
            for (std::size_t ci = 0; ci < l.bias.size(); ++ci)
                out << format_double(l.bias[ci]) << (ci + 1 < l.bias.size() ? ' ' : '\n');
        }
    }
}

MlpModel read_checkpoint(const std::string& path) {
    auto in = open_in(path);
    if (next_token(in, path, "magic") != "mns-checkpoint")
        bad_file(path, "not a checkpoint file");
    if (next_long(in, path, "version") != 1) bad_file(path, "unsupported checkpoint version");
    if (next_token(in, path, "activation keyword") != "activation")
        bad_file(path, "expected 'activation'");
    const Activation act = activation_from_name(next_token(in, path, "activation"));
    if (next_token(in, path, "layers keyword") != "layers") bad_file(path, "expected 'layers'");
    const long depth = next_long(in, path, "layer count");
    if (depth < 1) bad_file(path, "need at least one layer");

    std::vector<Layer> layers;
    for (long li = 0; li < depth; ++li) {
        if (next_token(in, path, "layer keyword") != "layer") bad_file(path, "expected 'layer'");
        const long rows = next_long(in, path, "layer rows");
        const long cols = next_long(in, path, "layer cols");
        const std::string biasness = next_token(in, path, "bias flag");
        if (rows < 1 || cols < 1 || (biasness != "bias" && biasness != "nobias"))
            bad_file(path, "malformed layer header");
        Layer l;
        l.weight = Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
        for (auto& w : l.weight.data()) w = next_double(in, path, "weight");
        if (biasness == "bias") {
            l.bias.resize(static_cast<std::size_t>(rows));
            for (auto& b : l.bias) b = next_double(in, path, "bias");
        }
        layers.push_back(std::move(l));
    }
    return MlpModel(std::move(layers), act);
}

std::string report_to_json(const ExperimentReport& report) {
    json j;
    j["schema_version"] = report.schema_version;
    j["method"] = method_name(report.method);
    j["seed"] = report.seed;
    j["rho"] = report.rho;
    json cfg = json::object();
    for (const auto& [k, v] : report.config_echo) cfg[k] = v;
    j["config"] = std::move(cfg);
    if (!report.stage1_curves.empty()) {
        j["stage1"] = {{"selected_epoch", report.stage1_selected_epoch},
                       {"curves", curves_to_json(report.stage1_curves)}};
    }
    j["stage2"] = {{"selected_epoch", report.stage2_selected_epoch},
                   {"curves", curves_to_json(report.stage2_curves)}};
    j["test_accuracy"] = report.test_accuracy;
    j["confusion"] = matrix_to_json(report.confusion);
    if (report.epsilon >= 0.0) j["epsilon"] = report.epsilon;
    if (report.t_hat) j["t_hat"] = matrix_to_json(*report.t_hat);
    if (report.t_true) j["t_true"] = matrix_to_json(*report.t_true);
    j["warnings"] = report.warnings;
    j["wall_clock_seconds"] = report.wall_clock_seconds;
    return j.dump(2) + "\n";
}

void write_report_json(const std::string& path, const ExperimentReport& report) {
    auto out = open_out(path);
    out << report_to_json(report);
}

void write_report_csv(const std::string& path, const ExperimentReport& report) {
    auto out = open_out(path);
    out << "stage,epoch,train_loss,val_loss,val_pair_error,val_pair_error_argmax,"
           "learning_rate\n";
    auto dump = [&](int stage, const std::vector<EpochRecord>& curves) {
        for (std::size_t e = 0; e < curves.size(); ++e) {
            const auto& r = curves[e];
            out << stage << ',' << e + 1 << ',' << format_double(r.train_loss) << ','
                << format_double(r.val_loss) << ',' << format_double(r.val_pair_error) << ','
                << format_double(r.val_pair_error_argmax) << ','
                << format_double(r.learning_rate) << '\n';
        }
    };
    dump(1, report.stage1_curves);
    dump(2, report.stage2_curves);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    auto in = open_in(path);
    std::map<std::string, std::string> kv;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                bad_file(path, "line " + std::to_string(lineno) + ": malformed section");
            section = strip(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            bad_file(path, "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty())
            bad_file(path, "line " + std::to_string(lineno) + ": empty key");
        kv[section.empty() ? key : section + "." + key] = value;
    }
    return kv;
}

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: " + key + " must be boolean, got '" + v + "'");
}

std::vector<std::size_t> parse_widths(const std::string& v) {
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(static_cast<std::size_t>(std::stoul(item)));
    return out;
}

} // namespace

ExperimentConfig experiment_config_from_map(const std::map<std::string, std::string>& kv) {
    ExperimentConfig cfg;
    for (const auto& [key, v] : kv) {
        if (key == "data.kind") {
            if (v == "blobs")
                cfg.data.kind = DatasetSpec::Kind::blobs;
            else if (v == "file")
                cfg.data.kind = DatasetSpec::Kind::file;
            else
                throw std::invalid_argument("config: data.kind must be blobs or file");
        } else if (key == "data.classes")
            cfg.data.blobs.num_classes = std::stoul(v);
        else if (key == "data.per_class")
            cfg.data.blobs.per_class = std::stoul(v);
        else if (key == "data.dim")
            cfg.data.blobs.dim = std::stoul(v);
        else if (key == "data.separation")
            cfg.data.blobs.separation = parse_double(v);
        else if (key == "data.spread")
            cfg.data.blobs.spread = parse_double(v);
        else if (key == "data.test_per_class")
            cfg.data.test_per_class = std::stoul(v);
        else if (key == "data.train_file")
            cfg.data.train_file = v;
        else if (key == "data.test_file")
            cfg.data.test_file = v;
        else if (key == "rho")
            cfg.rho = parse_double(v);
        else if (key == "seed")
            cfg.seed = std::stoull(v);
        else if (key == "method")
            cfg.method = method_from_name(v);
        else if (key == "validation_fraction")
            cfg.validation_fraction = parse_double(v);
        else if (key == "val_pairs_cap")
            cfg.val_pairs_cap = std::stoul(v);
        else if (key == "warm_start")
            cfg.warm_start = parse_bool(v, key);
        else if (key == "model.hidden")
            cfg.train.hidden = parse_widths(v);
        else if (key == "model.activation")
            cfg.train.activation = activation_from_name(v);
        else if (key == "model.with_bias")
            cfg.train.with_bias = parse_bool(v, key);
        else if (key == "optimizer.learning_rate")
            cfg.train.optimizer.adam.learning_rate = parse_double(v);
        else if (key == "optimizer.beta1")
            cfg.train.optimizer.adam.beta1 = parse_double(v);
        else if (key == "optimizer.beta2")
            cfg.train.optimizer.adam.beta2 = parse_double(v);
        else if (key == "optimizer.epsilon")
            cfg.train.optimizer.adam.epsilon = parse_double(v);
        else if (key == "optimizer.decay_every")
            cfg.train.optimizer.decay_every = std::stoul(v);
        else if (key == "optimizer.decay_factor")
            cfg.train.optimizer.decay_factor = parse_double(v);
        else if (key == "train.batch_size")
            cfg.train.batch_size = std::stoul(v);
        else if (key == "train.epochs")
            cfg.train.epochs = std::stoul(v);
        else if (key == "train.tau")
            cfg.train.tau = parse_double(v);
        else if (key == "train.pos_weight")
            cfg.train.pos_weight = parse_double(v);
        else if (key == "train.pairing") {
            if (v == "all_pairs")
                cfg.train.pairing = PairingStrategy::all_pairs();
            else if (v.rfind("sampled:", 0) == 0)
                cfg.train.pairing = PairingStrategy::sampled(std::stoul(v.substr(8)));
            else
                throw std::invalid_argument(
                    "config: train.pairing must be all_pairs or sampled:<k>");
        } else if (key == "anchors.k")
            cfg.anchors.k = std::stoul(v);
        else if (key == "anchors.percentile")
            cfg.anchors.percentile = parse_double(v);
        else
            throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    return cfg;
}

} // namespace mns
