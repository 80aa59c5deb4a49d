#include "ihtp/ihtc_format.hpp"

#include "json.hpp"

namespace ihtp {

using nlohmann::json;

bool looks_like_official_instance(const std::string& bytes) {
  json doc = json::parse(bytes, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("weights")) return false;
  const json& w = doc["weights"];
  return w.contains("patient_delay") || w.contains("room_mixed_age") ||
         w.contains("unscheduled_optional");
}

std::string official_to_canonical(const std::string& bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("invalid JSON: ") + err.what());
  }

  json out;
  out["days"] = doc.at("days");
  out["skill_levels"] = doc.at("skill_levels");
  out["shift_types"] = doc.at("shift_types");
  out["age_groups"] = doc.at("age_groups");

  const json& w = doc.at("weights");
  out["weights"] = {{"unscheduled", w.at("unscheduled_optional")},
                    {"delay", w.at("patient_delay")},
                    {"open_theater", w.at("open_operating_theater")},
                    {"surgeon_transfer", w.at("surgeon_transfer")},
                    {"age_mix", w.at("room_mixed_age")},
                    {"excess_workload", w.at("nurse_eccessive_workload")},
                    {"continuity", w.at("continuity_of_care")},
                    {"skill", w.at("room_nurse_skill")}};

  out["surgeons"] = json::array();
  for (const json& s : doc.at("surgeons"))
    out["surgeons"].push_back({{"id", s.at("id")}, {"capacity", s.at("max_surgery_time")}});
  out["operating_theaters"] = json::array();
  for (const json& t : doc.at("operating_theaters"))
    out["operating_theaters"].push_back({{"id", t.at("id")}, {"capacity", t.at("availability")}});
  out["rooms"] = doc.at("rooms");

  out["nurses"] = json::array();
  for (const json& n : doc.at("nurses")) {
    json shifts = json::array();
    for (const json& ws : n.at("working_shifts"))
      shifts.push_back({{"day", ws.at("day").get<int>() + 1},
                        {"shift", ws.at("shift")},
                        {"capacity", ws.at("max_load")}});
    out["nurses"].push_back(
        {{"id", n.at("id")}, {"skill", n.at("skill_level")}, {"shifts", shifts}});
  }

  out["occupants"] = json::array();
  for (const json& o : doc.at("occupants"))
    out["occupants"].push_back({{"id", o.at("id")},
                                {"gender", o.at("gender")},
                                {"age_group", o.at("age_group")},
                                {"length_of_stay", o.at("length_of_stay")},
                                {"workload_profile", o.at("workload_produced")},
                                {"skill_profile", o.at("skill_level_required")},
                                {"room", o.at("room_id")}});

  out["patients"] = json::array();
  for (const json& p : doc.at("patients")) {
    json node = {{"id", p.at("id")},
                 {"mandatory", p.at("mandatory")},
                 {"gender", p.at("gender")},
                 {"age_group", p.at("age_group")},
                 {"surgeon", p.at("surgeon_id")},
                 {"release_day", p.at("surgery_release_day").get<int>() + 1},
                 {"length_of_stay", p.at("length_of_stay")},
                 {"surgery_duration", p.at("surgery_duration")},
                 {"workload_profile", p.at("workload_produced")},
                 {"skill_profile", p.at("skill_level_required")}};
    if (p.at("mandatory").get<bool>()) node["deadline"] = p.at("surgery_due_day").get<int>() + 1;
    if (p.contains("incompatible_room_ids") && !p["incompatible_room_ids"].empty())
      node["incompatible_rooms"] = p["incompatible_room_ids"];
    out["patients"].push_back(std::move(node));
  }

  return out.dump(2) + "\n";
}

Instance parse_instance_auto(const std::string& bytes) {
  if (looks_like_official_instance(bytes)) return parse_instance(official_to_canonical(bytes));
  return parse_instance(bytes);
}

}  // namespace ihtp
