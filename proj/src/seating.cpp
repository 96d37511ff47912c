#include "npam/seating.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "npam/error.hpp"

namespace npam {

namespace {

template <class H>
void erase_handle(std::vector<H>& list, H h) {
  auto it = std::find(list.begin(), list.end(), h);
  if (it != list.end()) list.erase(it);
}

std::string where(TokenRef t) { return "(doc " + std::to_string(t.doc) + ", token " + std::to_string(t.pos) + ")"; }

}  // namespace

bool AuditReport::mentions(const std::string& family) const {
  return std::any_of(discrepancies.begin(), discrepancies.end(), [&](const Discrepancy& d) { return d.family == family; });
}

SeatingState::SeatingState(const std::vector<std::uint32_t>& doc_lengths, std::uint32_t vocab_size)
    : vocab_size_(vocab_size), restaurants_(doc_lengths.size()) {
  if (vocab_size == 0) throw ParameterError("SeatingState: vocabulary is empty");
  tokens_.reserve(doc_lengths.size());
  for (auto n : doc_lengths) tokens_.emplace_back(n);
}

void SeatingState::check_token(TokenRef token) const {
  if (token.doc >= tokens_.size() || token.pos >= tokens_[token.doc].size()) {
    throw StateError("no such token " + where(token));
  }
}

bool SeatingState::is_seated(TokenRef token) const {
  check_token(token);
  return tokens_[token.doc][token.pos].seated;
}

const Seat& SeatingState::seat_of(TokenRef token) const {
  if (!is_seated(token)) throw StateError("token " + where(token) + " is not seated");
  return tokens_[token.doc][token.pos].seat;
}

std::uint32_t SeatingState::word_of(TokenRef token) const {
  if (!is_seated(token)) throw StateError("token " + where(token) + " is not seated");
  return tokens_[token.doc][token.pos].word;
}

const SeatingState::Section* SeatingState::find_section(std::uint32_t doc, CategoryId category) const {
  for (const auto& s : restaurants_[doc].sections)
    if (s.category == category) return &s;
  return nullptr;
}

SeatingState::Section& SeatingState::section_for(std::uint32_t doc, CategoryId category) {
  auto& sections = restaurants_[doc].sections;
  for (auto& s : sections)
    if (s.category == category) return s;
  sections.push_back(Section{category, 0, 0, {}});
  return sections.back();
}

void SeatingState::validate_path(std::uint32_t doc, const FullPath& p) const {
  std::optional<CategoryId> category;
  if (!p.entryway.is_new()) {
    const auto e = p.entryway.id();
    if (!alive(e)) throw PathError("path names a removed entryway");
    if (entryway(e).doc != doc) throw PathError("path entryway belongs to another restaurant");
    if (p.category.is_new() || p.category.id() != entryway(e).category) {
      throw PathError("an existing entryway fixes the category");
    }
    category = entryway(e).category;
  } else if (!p.category.is_new()) {
    if (!alive(p.category.id())) throw PathError("path names a removed category");
    category = p.category.id();
  }

  if (!category && (!p.table.is_new() || !p.menu.is_new())) {
    throw PathError("a new category requires a new table and a new menu");
  }

  if (!p.table.is_new()) {
    const auto t = p.table.id();
    if (!alive(t)) throw PathError("path names a removed table");
    const auto& tab = table(t);
    if (tab.doc != doc || tab.category != *category) throw PathError("path table is not in this restaurant section");
    if (p.menu.is_new() || p.menu.id() != tab.menu) throw PathError("an existing table fixes the menu");
    if (p.dish.is_new() || p.dish.id() != menu(tab.menu).dish) throw PathError("an existing table fixes the dish");
    return;
  }
  if (!p.menu.is_new()) {
    const auto m = p.menu.id();
    if (!alive(m)) throw PathError("path names a removed menu");
    if (menu(m).category != *category) throw PathError("path menu belongs to another category");
    if (p.dish.is_new() || p.dish.id() != menu(m).dish) throw PathError("an existing menu fixes the dish");
    return;
  }
  if (!p.dish.is_new() && !alive(p.dish.id())) throw PathError("path names a removed dish");
}

Seat SeatingState::seat(TokenRef token, std::uint32_t word, const FullPath& path) {
  check_token(token);
  auto& rec = tokens_[token.doc][token.pos];
  if (rec.seated) throw StateError("token " + where(token) + " is already seated");
  if (word >= vocab_size_) throw StateError("word id " + std::to_string(word) + " outside vocabulary");
  validate_path(token.doc, path);

  const std::uint32_t j = token.doc;
  auto& rest = restaurants_[j];

  CategoryId cat;
  if (!path.entryway.is_new()) {
    cat = entryway(path.entryway.id()).category;
  } else if (!path.category.is_new()) {
    cat = path.category.id();
  } else {
    cat = CategoryId{categories_.acquire()};
    auto& c = categories_[cat.slot];
    c.entryways = c.tables = c.customers = 0;
    c.menus.clear();
    c.serial = next_serial();
    live_categories_.push_back(cat);
  }
  auto& section = section_for(j, cat);
  auto& category_rec = categories_[cat.slot];

  EntrywayId ent;
  if (!path.entryway.is_new()) {
    ent = path.entryway.id();
  } else {
    ent = EntrywayId{entryways_.acquire()};
    entryways_[ent.slot] = Entryway{j, cat, 0, next_serial()};
    rest.entryways.push_back(ent);
    ++section.entryways;
    ++category_rec.entryways;
    ++total_entryways_;
  }

  DishId dish_id;
  MenuId menu_id;
  TableId table_id;
  if (!path.table.is_new()) {
    table_id = path.table.id();
    menu_id = tables_[table_id.slot].menu;
    dish_id = menus_[menu_id.slot].dish;
  } else {
    if (!path.menu.is_new()) {
      menu_id = path.menu.id();
      dish_id = menus_[menu_id.slot].dish;
    } else {
      if (!path.dish.is_new()) {
        dish_id = path.dish.id();
      } else {
        dish_id = DishId{dishes_.acquire()};
        auto& d = dishes_[dish_id.slot];
        d.menus = d.customers = 0;
        d.word_counts.assign(vocab_size_, 0);
        d.serial = next_serial();
        live_dishes_.push_back(dish_id);
      }
      menu_id = MenuId{menus_.acquire()};
      menus_[menu_id.slot] = Menu{cat, dish_id, 0, next_serial()};
      category_rec.menus.push_back(menu_id);
      ++dishes_[dish_id.slot].menus;
      ++total_menus_;
    }
    table_id = TableId{tables_.acquire()};
    tables_[table_id.slot] = Table{j, cat, menu_id, 0, next_serial()};
    section.tables.push_back(table_id);
    ++menus_[menu_id.slot].tables;
    ++category_rec.tables;
    ++total_tables_;
  }

  ++entryways_[ent.slot].customers;
  ++category_rec.customers;
  ++section.customers;
  ++rest.customers;
  ++tables_[table_id.slot].customers;
  auto& d = dishes_[dish_id.slot];
  ++d.customers;
  ++d.word_counts[word];
  ++total_customers_;

  rec.seated = true;
  rec.word = word;
  rec.seat = Seat{ent, cat, table_id, menu_id, dish_id};
  return rec.seat;
}

std::uint32_t SeatingState::unseat(TokenRef token) {
  check_token(token);
  auto& rec = tokens_[token.doc][token.pos];
  if (!rec.seated) throw StateError("token " + where(token) + " is not seated");
  const Seat s = rec.seat;
  const std::uint32_t word = rec.word;
  const std::uint32_t j = token.doc;
  auto& rest = restaurants_[j];
  auto& cat = categories_[s.category.slot];

  auto sec_it = std::find_if(rest.sections.begin(), rest.sections.end(),
                             [&](const Section& x) { return x.category == s.category; });
  auto& section = *sec_it;

  auto& tab = tables_[s.table.slot];
  auto& d = dishes_[s.dish.slot];
  --tab.customers;
  --d.word_counts[word];
  --d.customers;
  --entryways_[s.entryway.slot].customers;
  --cat.customers;
  --section.customers;
  --rest.customers;
  --total_customers_;

  if (tab.customers == 0) {
    erase_handle(section.tables, s.table);
    tables_.release(s.table.slot);
    --cat.tables;
    --total_tables_;
    auto& m = menus_[s.menu.slot];
    if (--m.tables == 0) {
      erase_handle(cat.menus, s.menu);
      menus_.release(s.menu.slot);
      --total_menus_;
      if (--d.menus == 0) {
        erase_handle(live_dishes_, s.dish);
        dishes_.release(s.dish.slot);
      }
    }
  }

  if (entryways_[s.entryway.slot].customers == 0) {
    erase_handle(rest.entryways, s.entryway);
    entryways_.release(s.entryway.slot);
    --section.entryways;
    --total_entryways_;
    if (--cat.entryways == 0) {
      erase_handle(live_categories_, s.category);
      categories_.release(s.category.slot);
    }
  }

  if (section.customers == 0) rest.sections.erase(sec_it);

  rec.seated = false;
  return word;
}

// ---------------------------------------------------------------------------

AuditReport audit_counts(const SeatingState& st) {
  AuditReport report;
  auto flag = [&](const char* family, std::string detail) { report.discrepancies.push_back({family, std::move(detail)}); };

  // Recount everything from the token records.
  std::map<std::uint32_t, std::uint64_t> ent_customers, tab_customers;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> section_customers;  // (doc, category slot)
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> dish_word;        // (dish slot, word)
  std::map<std::uint32_t, std::uint64_t> dish_customers, cat_customers;
  std::vector<std::uint64_t> doc_customers(st.restaurants_.size(), 0);
  std::uint64_t customers = 0;

  for (std::uint32_t j = 0; j < st.tokens_.size(); ++j) {
    for (std::uint32_t i = 0; i < st.tokens_[j].size(); ++i) {
      const auto& rec = st.tokens_[j][i];
      if (!rec.seated) continue;
      const auto& s = rec.seat;
      ++customers;
      ++doc_customers[j];
      ++ent_customers[s.entryway.slot];
      ++tab_customers[s.table.slot];
      ++section_customers[{j, s.category.slot}];
      ++dish_word[{s.dish.slot, rec.word}];
      ++dish_customers[s.dish.slot];
      ++cat_customers[s.category.slot];
      if (!st.alive(s.entryway) || !st.alive(s.table) || !st.alive(s.menu) || !st.alive(s.dish) || !st.alive(s.category)) {
        flag("seating", "token (" + std::to_string(j) + "," + std::to_string(i) + ") references a removed structure");
        continue;
      }
      if (st.entryway(s.entryway).category != s.category || st.entryway(s.entryway).doc != j)
        flag("seating", "entryway/category link broken for token in doc " + std::to_string(j));
      if (st.table(s.table).menu != s.menu || st.table(s.table).category != s.category || st.table(s.table).doc != j)
        flag("seating", "table/menu link broken for token in doc " + std::to_string(j));
      if (st.menu(s.menu).dish != s.dish || st.menu(s.menu).category != s.category)
        flag("seating", "menu/dish link broken for token in doc " + std::to_string(j));
    }
  }
  if (customers != st.total_customers_) flag("totals", "total customers stored " + std::to_string(st.total_customers_) + " recount " + std::to_string(customers));

  // C(j,k) and C(l,j').
  std::map<std::uint32_t, std::uint64_t> cat_entryways;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> section_entryways;
  std::uint64_t n_entryways = 0;
  for (std::uint32_t slot = 0; slot < st.entryways_.capacity(); ++slot) {
    if (!st.entryways_.alive(slot)) continue;
    const auto& e = st.entryways_[slot];
    ++n_entryways;
    ++cat_entryways[e.category.slot];
    ++section_entryways[{e.doc, e.category.slot}];
    const auto want = ent_customers.contains(slot) ? ent_customers[slot] : 0;
    if (e.customers != want) flag("C(j,k)", "entryway " + std::to_string(e.serial) + " stores " + std::to_string(e.customers) + " recount " + std::to_string(want));
    if (e.customers == 0) flag("empty", "entryway " + std::to_string(e.serial) + " retained with no customers");
    const auto& list = st.restaurants_[e.doc].entryways;
    if (std::find(list.begin(), list.end(), EntrywayId{slot}) == list.end()) flag("registry", "entryway missing from its restaurant list");
  }
  if (n_entryways != st.total_entryways_) flag("C(l,j')", "total entryways stored " + std::to_string(st.total_entryways_) + " recount " + std::to_string(n_entryways));

  // C(j,l,n), C(j',l,p).
  std::map<std::uint32_t, std::uint64_t> menu_tables, cat_tables;
  std::uint64_t n_tables = 0;
  for (std::uint32_t slot = 0; slot < st.tables_.capacity(); ++slot) {
    if (!st.tables_.alive(slot)) continue;
    const auto& t = st.tables_[slot];
    ++n_tables;
    ++menu_tables[t.menu.slot];
    ++cat_tables[t.category.slot];
    const auto want = tab_customers.contains(slot) ? tab_customers[slot] : 0;
    if (t.customers != want) flag("C(j,l,n)", "table " + std::to_string(t.serial) + " stores " + std::to_string(t.customers) + " recount " + std::to_string(want));
    if (t.customers == 0) flag("empty", "table " + std::to_string(t.serial) + " retained with no customers");
    const auto* sec = st.find_section(t.doc, t.category);
    if (!sec || std::find(sec->tables.begin(), sec->tables.end(), TableId{slot}) == sec->tables.end())
      flag("registry", "table missing from its section list");
  }
  if (n_tables != st.total_tables_) flag("C(j',l,p)", "total tables stored " + std::to_string(st.total_tables_) + " recount " + std::to_string(n_tables));

  // C(l',m).
  std::map<std::uint32_t, std::uint64_t> dish_menus;
  std::uint64_t n_menus = 0;
  for (std::uint32_t slot = 0; slot < st.menus_.capacity(); ++slot) {
    if (!st.menus_.alive(slot)) continue;
    const auto& m = st.menus_[slot];
    ++n_menus;
    ++dish_menus[m.dish.slot];
    const auto want = menu_tables.contains(slot) ? menu_tables[slot] : 0;
    if (m.tables != want) flag("C(j',l,p)", "menu " + std::to_string(m.serial) + " stores " + std::to_string(m.tables) + " tables, recount " + std::to_string(want));
    if (m.tables == 0) flag("empty", "menu " + std::to_string(m.serial) + " retained with no tables");
    if (!st.alive(m.category)) {
      flag("registry", "menu belongs to a removed category");
    } else {
      const auto& list = st.categories_[m.category.slot].menus;
      if (std::find(list.begin(), list.end(), MenuId{slot}) == list.end()) flag("registry", "menu missing from its category list");
    }
  }
  if (n_menus != st.total_menus_) flag("C(l',m)", "total menus stored " + std::to_string(st.total_menus_) + " recount " + std::to_string(n_menus));

  std::uint64_t n_categories = 0;
  for (std::uint32_t slot = 0; slot < st.categories_.capacity(); ++slot) {
    if (!st.categories_.alive(slot)) continue;
    ++n_categories;
    const auto& c = st.categories_[slot];
    const auto we = cat_entryways.contains(slot) ? cat_entryways[slot] : 0;
    const auto wt = cat_tables.contains(slot) ? cat_tables[slot] : 0;
    const auto wc = cat_customers.contains(slot) ? cat_customers[slot] : 0;
    if (c.entryways != we) flag("C(l,j')", "category " + std::to_string(c.serial) + " stores " + std::to_string(c.entryways) + " entryways, recount " + std::to_string(we));
    if (c.tables != wt) flag("C(j',l,p)", "category " + std::to_string(c.serial) + " stores " + std::to_string(c.tables) + " tables, recount " + std::to_string(wt));
    if (c.customers != wc) flag("customers", "category " + std::to_string(c.serial) + " stores " + std::to_string(c.customers) + " customers, recount " + std::to_string(wc));
    if (c.entryways == 0) flag("empty", "category " + std::to_string(c.serial) + " retained with no entryways");
  }
  if (n_categories != st.live_categories_.size()) flag("registry", "live category list size mismatch");

  std::uint64_t n_dishes = 0;
  for (std::uint32_t slot = 0; slot < st.dishes_.capacity(); ++slot) {
    if (!st.dishes_.alive(slot)) continue;
    ++n_dishes;
    const auto& d = st.dishes_[slot];
    const auto wm = dish_menus.contains(slot) ? dish_menus[slot] : 0;
    const auto wc = dish_customers.contains(slot) ? dish_customers[slot] : 0;
    if (d.menus != wm) flag("C(l',m)", "dish " + std::to_string(d.serial) + " stores " + std::to_string(d.menus) + " menus, recount " + std::to_string(wm));
    if (d.customers != wc) flag("C(m,x)", "dish " + std::to_string(d.serial) + " stores total " + std::to_string(d.customers) + ", recount " + std::to_string(wc));
    if (d.menus == 0) flag("empty", "dish " + std::to_string(d.serial) + " retained with no menus");
    std::uint64_t row_total = 0;
    for (std::uint32_t x = 0; x < d.word_counts.size(); ++x) {
      row_total += d.word_counts[x];
      auto it = dish_word.find({slot, x});
      const std::uint64_t want = it == dish_word.end() ? 0 : it->second;
      if (d.word_counts[x] != want) flag("C(m,x)", "dish " + std::to_string(d.serial) + " word " + std::to_string(x) + " stores " + std::to_string(d.word_counts[x]) + ", recount " + std::to_string(want));
    }
    if (row_total != d.customers) flag("C(m,x)", "dish " + std::to_string(d.serial) + " word counts do not sum to its total");
  }
  if (n_dishes != st.live_dishes_.size()) flag("registry", "live dish list size mismatch");

  // Per-restaurant sections.
  for (std::uint32_t j = 0; j < st.restaurants_.size(); ++j) {
    const auto& r = st.restaurants_[j];
    if (r.customers != doc_customers[j]) flag("C(j,k)", "restaurant " + std::to_string(j) + " stores " + std::to_string(r.customers) + " customers, recount " + std::to_string(doc_customers[j]));
    for (const auto& sec : r.sections) {
      const std::pair key{j, sec.category.slot};
      const auto wc = section_customers.contains(key) ? section_customers[key] : 0;
      const auto we = section_entryways.contains(key) ? section_entryways[key] : 0;
      if (sec.customers != wc) flag("C(j,l,n)", "section (" + std::to_string(j) + ", category " + std::to_string(sec.category.slot) + ") stores " + std::to_string(sec.customers) + " customers, recount " + std::to_string(wc));
      if (sec.entryways != we) flag("C(l,j')", "section (" + std::to_string(j) + ", category " + std::to_string(sec.category.slot) + ") stores " + std::to_string(sec.entryways) + " entryways, recount " + std::to_string(we));
      if (sec.customers == 0) flag("empty", "empty section retained in restaurant " + std::to_string(j));
    }
  }
  return report;
}

}  // namespace npam
