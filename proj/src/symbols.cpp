// Copyright 2026 The mbdl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mbdl/symbols.hpp"

#include <algorithm>

namespace mbdl {

std::vector<Symbol> extract_symbols(const BinaryImage& img) {
    const int w = img.width(), h = img.height();
    std::vector<i32> label(static_cast<usize>(w) * h, -1);
    auto idx = [w](int r, int c) { return static_cast<usize>(r) * w + c; };

    struct Component {
        int min_r, min_c, max_r, max_c;
        std::vector<std::pair<int, int>> pixels;
    };
    std::vector<Component> comps;
    std::vector<std::pair<int, int>> stack;

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!img.at(r, c) || label[idx(r, c)] >= 0) continue;
            const i32 id = static_cast<i32>(comps.size());
            Component comp{r, c, r, c, {}};
            label[idx(r, c)] = id;
            stack.push_back({r, c});
            while (!stack.empty()) {
                auto [pr, pc] = stack.back();
                stack.pop_back();
                comp.pixels.push_back({pr, pc});
                comp.min_r = std::min(comp.min_r, pr);
                comp.min_c = std::min(comp.min_c, pc);
                comp.max_r = std::max(comp.max_r, pr);
                comp.max_c = std::max(comp.max_c, pc);
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        if (!dr && !dc) continue;
                        const int nr = pr + dr, nc = pc + dc;
                        if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
                        if (!img.at(nr, nc) || label[idx(nr, nc)] >= 0) continue;
                        label[idx(nr, nc)] = id;
                        stack.push_back({nr, nc});
                    }
                }
            }
            comps.push_back(std::move(comp));
        }
    }

    // Raster order of the bounding-box top-left corner; discovery order
    // breaks ties so the result is stable.
    std::vector<int> order(comps.size());
    for (usize i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (comps[a].min_r != comps[b].min_r) return comps[a].min_r < comps[b].min_r;
        return comps[a].min_c < comps[b].min_c;
    });

    std::vector<Symbol> out;
    out.reserve(comps.size());
    for (int ci : order) {
        const Component& comp = comps[ci];
        Symbol s;
        s.id = static_cast<int>(out.size());
        s.row = comp.min_r;
        s.col = comp.min_c;
        s.bitmap = BinaryImage(comp.max_c - comp.min_c + 1, comp.max_r - comp.min_r + 1);
        for (auto [pr, pc] : comp.pixels) {
            s.bitmap.set(pr - comp.min_r, pc - comp.min_c, 1);
            s.centroid_r_sum += pr - comp.min_r;
            s.centroid_c_sum += pc - comp.min_c;
        }
        s.fg_count = static_cast<i64>(comp.pixels.size());
        out.push_back(std::move(s));
    }
    return out;
}

SymbolPartition partition_symbols(std::vector<Symbol> all, i64 max_symbol_area) {
    const usize n = all.size();
    std::vector<u8> generic(n, 0);
    for (usize i = 0; i < n; ++i)
        generic[i] = static_cast<i64>(all[i].width()) * all[i].height() > max_symbol_area;

    // A generic component whose foreground reaches into a symbol's box is
    // promoted back to a symbol; the codec relies on generic content living
    // strictly outside every symbol box.
    auto boxes_intersect = [](const Symbol& a, const Symbol& b) {
        return a.row < b.row + b.height() && b.row < a.row + a.height() &&
               a.col < b.col + b.width() && b.col < a.col + a.width();
    };
    auto fg_inside_box = [&](const Symbol& g, const Symbol& s) {
        if (!boxes_intersect(g, s)) return false;
        const int r0 = std::max(g.row, s.row), r1 = std::min(g.row + g.height(), s.row + s.height());
        const int c0 = std::max(g.col, s.col), c1 = std::min(g.col + g.width(), s.col + s.width());
        for (int r = r0; r < r1; ++r)
            for (int c = c0; c < c1; ++c)
                if (g.bitmap.at(r - g.row, c - g.col)) return true;
        return false;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (usize gi = 0; gi < n && !changed; ++gi) {
            if (!generic[gi]) continue;
            for (usize si = 0; si < n && !changed; ++si) {
                if (generic[si]) continue;
                if (fg_inside_box(all[gi], all[si])) {
                    generic[gi] = 0;
                    changed = true;
                }
            }
        }
    }

    SymbolPartition part;
    for (usize i = 0; i < n; ++i) {
        auto& dst = generic[i] ? part.generic : part.symbols;
        Symbol& s = all[i];
        s.id = static_cast<int>(dst.size());
        dst.push_back(std::move(s));
    }
    return part;
}

void paste_symbol(BinaryImage& canvas, const Symbol& sym) {
    for (int r = 0; r < sym.height(); ++r)
        for (int c = 0; c < sym.width(); ++c)
            if (sym.bitmap.at(r, c)) canvas.set(sym.row + r, sym.col + c, 1);
}

bool same_symbol_set(const std::vector<Symbol>& a, const std::vector<Symbol>& b) {
    if (a.size() != b.size()) return false;
    for (usize i = 0; i < a.size(); ++i)
        if (a[i].row != b[i].row || a[i].col != b[i].col || a[i].bitmap != b[i].bitmap)
            return false;
    return true;
}

} // namespace mbdl
