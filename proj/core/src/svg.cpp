#include "topogen/svg.hpp"

#include <cstdio>
#include <fstream>

#include "topogen/error.hpp"

namespace topogen {

void PlotSpec::validate() const {
    if (!(scale_cap > 0.0)) throw InputError("plot scale cap must be positive");
}

namespace {

// Fixed two-decimal pixel coordinates keep the output byte-stable.
std::string px(double v) {
    char buf[40];
    int len = std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf, len);
}

std::string format_g6(double x) {
    char buf[40];
    int len = std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::string(buf, len);
}

constexpr double kMargin = 42.0;
constexpr double kPlot = 320.0;

const char* dim_color(int dim) { return dim == 0 ? "black" : "red"; }

void append_arrow(std::string& s, double x, double y, const char* color) {
    s += "<path class=\"arrow\" fill=\"";
    s += color;
    s += "\" d=\"M" + px(x) + " " + px(y) + " l-7 -3.5 v7 z\"/>\n";
}

void append_mark(std::string& s, int dim, double x, double y) {
    if (dim == 0) {
        s += "<circle class=\"mark-h0\" fill=\"black\" r=\"3.5\" cx=\"" + px(x) + "\" cy=\"" +
             px(y) + "\"/>\n";
    } else {
        s += "<polygon class=\"mark-h1\" fill=\"red\" points=\"" + px(x) + "," + px(y - 4.2) +
             " " + px(x - 3.8) + "," + px(y + 2.6) + " " + px(x + 3.8) + "," + px(y + 2.6) +
             "\"/>\n";
    }
}

std::string svg_open(double width, double height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(width) + "\" height=\"" +
           px(height) + "\" viewBox=\"0 0 " + px(width) + " " + px(height) +
           "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect fill=\"white\" x=\"0\" y=\"0\" "
           "width=\"" +
           px(width) + "\" height=\"" + px(height) + "\"/>\n";
}

std::string scatter_svg(const PersistenceDiagram& d, const PlotSpec& spec, bool rotated) {
    double cap = spec.scale_cap;
    double w = kMargin * 2 + kPlot, h = kMargin * 2 + kPlot;
    auto X = [&](double v) { return kMargin + v / cap * kPlot; };
    auto Y = [&](double v) { return kMargin + kPlot - v / cap * kPlot; };

    std::string s = svg_open(w, h);
    s += "<rect class=\"frame\" fill=\"none\" stroke=\"black\" x=\"" + px(kMargin) + "\" y=\"" +
         px(kMargin) + "\" width=\"" + px(kPlot) + "\" height=\"" + px(kPlot) + "\"/>\n";
    if (!rotated) {
        s += "<line class=\"diagonal\" stroke=\"gray\" stroke-dasharray=\"4 3\" x1=\"" +
             px(X(0)) + "\" y1=\"" + px(Y(0)) + "\" x2=\"" + px(X(cap)) + "\" y2=\"" +
             px(Y(cap)) + "\"/>\n";
    }
    s += "<text x=\"" + px(kMargin + kPlot / 2) + "\" y=\"" + px(h - 8.0) +
         "\" text-anchor=\"middle\">birth</text>\n";
    s += "<text x=\"12\" y=\"" + px(kMargin + kPlot / 2) + "\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 12 " +
         px(kMargin + kPlot / 2) + ")\">" + (rotated ? "persistence" : "death") + "</text>\n";
    s += "<text class=\"cap\" x=\"" + px(kMargin + kPlot) + "\" y=\"" + px(kMargin - 8.0) +
         "\" text-anchor=\"end\">cap " + format_g6(cap) + "</text>\n";

    for (int dim = 0; dim < 2; ++dim) {
        if (!spec.include_dim[dim]) continue;
        for (const Bar& b : d.h[dim]) {
            double yval = b.essential() ? cap : (rotated ? b.death - b.birth : b.death);
            append_mark(s, dim, X(b.birth), Y(yval));
            if (b.essential()) append_arrow(s, X(b.birth) + 1.0, Y(yval) - 6.0, dim_color(dim));
        }
    }
    s += "</svg>\n";
    return s;
}

std::string barcode_svg(const PersistenceDiagram& d, const PlotSpec& spec) {
    double cap = spec.scale_cap;
    std::vector<BarcodeBar> rows_all = barcodes(d, cap);
    std::vector<BarcodeBar> rows;
    for (const BarcodeBar& r : rows_all)
        if (spec.include_dim[r.dim]) rows.push_back(r);

    const double row_h = 9.0;
    double w = kMargin * 2 + kPlot;
    double h = kMargin * 2 + std::max(row_h * static_cast<double>(rows.size()), row_h);
    auto X = [&](double v) { return kMargin + v / cap * kPlot; };

    std::string s = svg_open(w, h);
    s += "<rect class=\"frame\" fill=\"none\" stroke=\"black\" x=\"" + px(kMargin) + "\" y=\"" +
         px(kMargin) + "\" width=\"" + px(kPlot) + "\" height=\"" +
         px(h - 2 * kMargin) + "\"/>\n";
    s += "<text class=\"cap\" x=\"" + px(kMargin + kPlot) + "\" y=\"" + px(kMargin - 8.0) +
         "\" text-anchor=\"end\">cap " + format_g6(cap) + "</text>\n";
    s += "<text x=\"" + px(kMargin + kPlot / 2) + "\" y=\"" + px(h - 8.0) +
         "\" text-anchor=\"middle\">scale</text>\n";

    for (size_t i = 0; i < rows.size(); ++i) {
        const BarcodeBar& r = rows[i];
        double y = kMargin + row_h * static_cast<double>(i) + row_h / 2.0;
        double x0 = X(r.birth), x1 = X(r.death);
        // zero-length leader so bars born at the right edge stay visible
        if (x1 - x0 < 1.0) x1 = x0 + 1.0;
        s += "<line class=\"bar-h";
        s += char('0' + r.dim);
        s += "\" stroke=\"";
        s += dim_color(r.dim);
        s += "\" stroke-width=\"3\" x1=\"" + px(x0) + "\" y1=\"" + px(y) + "\" x2=\"" + px(x1) +
             "\" y2=\"" + px(y) + "\"/>\n";
        if (r.clipped) append_arrow(s, x1 + 8.0, y, dim_color(r.dim));
    }
    s += "</svg>\n";
    return s;
}

} // namespace

std::string render_svg(const PersistenceDiagram& d, const PlotSpec& spec) {
    spec.validate();
    switch (spec.kind) {
    case PlotKind::PersistenceDiagram: return scatter_svg(d, spec, false);
    case PlotKind::RotatedPersistenceDiagram: return scatter_svg(d, spec, true);
    case PlotKind::Barcode: return barcode_svg(d, spec);
    }
    throw InputError("unknown plot kind");
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path);
    out << content;
    if (!out) throw InputError("write failed: " + path);
}

} // namespace topogen
