#pragma once

#include <json.hpp>

#include <string>

#include "vsl/linalg.hpp"
#include "vsl/types.hpp"

namespace vsl {

// Complex scalars serialize as [re, im]; matrices as row-major nested
// arrays of such pairs.

inline nlohmann::json complex_to_json(const Complex& z) {
    return nlohmann::json::array({z.real(), z.imag()});
}

inline Complex complex_from_json(const nlohmann::json& j,
                                 const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError(where + ": expected [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline nlohmann::json matrix_to_json(const CMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Index j = 0; j < m.cols(); ++j)
            row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline CMatrix matrix_from_json(const nlohmann::json& j, Index rows, Index cols,
                                const std::string& where) {
    if (!j.is_array() || Index(j.size()) != rows)
        throw ParseError(where + ": expected " + std::to_string(rows) + " rows");
    CMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const nlohmann::json& row = j[i];
        if (!row.is_array() || Index(row.size()) != cols)
            throw ParseError(where + " row " + std::to_string(i) +
                             ": expected " + std::to_string(cols) + " entries");
        for (Index k = 0; k < cols; ++k)
            m(i, k) = complex_from_json(
                row[k],
                where + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
    }
    return m;
}

// A subspace serializes as the list of its orthonormal basis vectors.
inline nlohmann::json basis_to_json(const SubspaceBasis& b) {
    nlohmann::json vecs = nlohmann::json::array();
    for (Index j = 0; j < b.dim(); ++j) {
        nlohmann::json vec = nlohmann::json::array();
        for (Index i = 0; i < b.ambient_dim(); ++i)
            vec.push_back(complex_to_json(b.columns()(i, j)));
        vecs.push_back(std::move(vec));
    }
    return vecs;
}

}  // namespace vsl
