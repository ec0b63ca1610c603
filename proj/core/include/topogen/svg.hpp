#pragma once

#include <string>

#include "topogen/persistence.hpp"

namespace topogen {

enum class PlotKind : uint8_t {
    PersistenceDiagram,        // (birth, death) scatter
    RotatedPersistenceDiagram, // (birth, death - birth) scatter
    Barcode,                   // one horizontal bar per interval
};

struct PlotSpec {
    PlotKind kind = PlotKind::PersistenceDiagram;
    double scale_cap = 1.0; // must be positive; infinite features draw at the cap
    bool include_dim[2] = {true, true};

    void validate() const;
};

// Deterministic standalone SVG. H0 marks are black circles, H1 marks
// red triangles; barcode rows follow barcodes() order and essential
// bars run to the cap with an arrowhead. Byte-identical output for
// identical inputs.
std::string render_svg(const PersistenceDiagram& d, const PlotSpec& spec);

void write_text_file(const std::string& path, const std::string& content);

} // namespace topogen
