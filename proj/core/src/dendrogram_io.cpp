#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "modoma/cluster.hpp"
#include "modoma/error.hpp"
#include "modoma/text.hpp"

namespace modoma::cluster {

using nlohmann::json;

DendrogramFormat parse_dendrogram_format(std::string_view name) {
    if (name == "newick") return DendrogramFormat::newick;
    if (name == "svg") return DendrogramFormat::svg;
    if (name == "json") return DendrogramFormat::json;
    throw ConfigError("unknown dendrogram format '" + std::string(name) + "'");
}

std::string_view extension(DendrogramFormat format) {
    switch (format) {
    case DendrogramFormat::newick: return "newick";
    case DendrogramFormat::svg: return "svg";
    case DendrogramFormat::json: return "json";
    }
    return "";
}

namespace {

std::string newick_label(const std::string& label) {
    if (!label.empty() && label.find_first_of(" \t\n()[]':;,") == std::string::npos) return label;
    std::string out = "'";
    for (char c : label) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

std::pair<std::size_t, std::size_t> children(const Dendrogram& d, std::size_t node) {
    const auto& m = d.merges[node - d.leaves.size()];
    return {m.left, m.right};
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string to_newick(const Dendrogram& d) {
    validate(d);
    // Branch length = parent height - child height.
    std::function<std::string(std::size_t, double)> emit = [&](std::size_t node, double parent) {
        std::string s;
        if (d.is_leaf(node)) {
            s = newick_label(d.leaves[node]);
        } else {
            const auto [l, r] = children(d, node);
            const double h = d.height(node);
            s = "(" + emit(l, h) + "," + emit(r, h) + ")";
        }
        if (node != d.root()) s += ":" + text::format_double(parent - d.height(node));
        return s;
    };
    return emit(d.root(), 0.0) + ";";
}

std::string to_json(const Dendrogram& d) {
    json merges = json::array();
    for (const auto& m : d.merges) {
        merges.push_back({{"left", m.left}, {"right", m.right}, {"height", m.height}});
    }
    json doc = {{"leaves", d.leaves}, {"merges", std::move(merges)}};
    return doc.dump(2) + "\n";
}

Dendrogram dendrogram_from_json(std::string_view text) {
    Dendrogram d;
    try {
        const json doc = json::parse(text);
        d.leaves = doc.at("leaves").get<std::vector<std::string>>();
        for (const auto& m : doc.at("merges")) {
            d.merges.push_back({m.at("left").get<std::size_t>(), m.at("right").get<std::size_t>(),
                                m.at("height").get<double>()});
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed dendrogram JSON: ") + e.what());
    }
    try {
        validate(d);
    } catch (const PreconditionError& e) {
        throw DataError(std::string("invalid dendrogram: ") + e.what());
    }
    return d;
}

std::string to_svg(const Dendrogram& d) {
    validate(d);
    const std::size_t n = d.leaves.size();
    constexpr double row = 16.0, label_width = 160.0, plot_width = 480.0, margin = 10.0;
    const double top = d.height(d.root()) > 0.0 ? d.height(d.root()) : 1.0;
    const double axis_y = margin + static_cast<double>(n) * row + 10.0;
    const double width = label_width + plot_width + 2 * margin;
    const double svg_height = axis_y + 30.0;
    auto x_of = [&](double h) { return margin + label_width + plot_width * h / top; };

    // Leaves are laid out in tree order so that branches never cross.
    std::vector<double> y(2 * n - 1, 0.0);
    std::size_t next_row = 0;
    std::function<void(std::size_t)> place = [&](std::size_t node) {
        if (d.is_leaf(node)) {
            y[node] = margin + (static_cast<double>(next_row++) + 0.5) * row;
            return;
        }
        const auto [l, r] = children(d, node);
        place(l);
        place(r);
        y[node] = (y[l] + y[r]) / 2.0;
    };
    place(d.root());

    std::ostringstream out;
    auto num = [](double v) { return text::format_double(v); };
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
        << num(svg_height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (std::size_t leaf = 0; leaf < n; ++leaf) {
        out << "  <text x=\"" << num(margin + label_width - 4) << "\" y=\"" << num(y[leaf] + 4)
            << "\" text-anchor=\"end\">" << xml_escape(d.leaves[leaf]) << "</text>\n";
    }
    for (std::size_t i = 0; i < d.merges.size(); ++i) {
        const std::size_t self = n + i;
        const double x = x_of(d.height(self));
        const auto [l, r] = children(d, self);
        out << "  <path d=\"M" << num(x_of(d.height(l))) << ' ' << num(y[l]) << " H" << num(x)
            << " V" << num(y[r]) << " H" << num(x_of(d.height(r)))
            << "\" fill=\"none\" stroke=\"black\"/>\n";
    }
    out << "  <line x1=\"" << num(x_of(0)) << "\" y1=\"" << num(axis_y) << "\" x2=\"" << num(x_of(top))
        << "\" y2=\"" << num(axis_y) << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double h = top * t / 4.0;
        out << "  <text x=\"" << num(x_of(h)) << "\" y=\"" << num(axis_y + 14)
            << "\" text-anchor=\"middle\">" << num(h) << "</text>\n";
    }
    out << "  <text x=\"" << num(x_of(top / 2)) << "\" y=\"" << num(axis_y + 27)
        << "\" text-anchor=\"middle\">height</text>\n";
    out << "</svg>\n";
    return out.str();
}

void export_dendrogram(const Dendrogram& d, DendrogramFormat format, const std::filesystem::path& path) {
    std::string body;
    switch (format) {
    case DendrogramFormat::newick: body = to_newick(d) + "\n"; break;
    case DendrogramFormat::svg: body = to_svg(d); break;
    case DendrogramFormat::json: body = to_json(d); break;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << body;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Dendrogram load_dendrogram_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return dendrogram_from_json(buf.str());
}

} // namespace modoma::cluster
