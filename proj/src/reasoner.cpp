#include "ersatz/reasoner.hpp"

#include <algorithm>

namespace ersatz {

namespace {

void require_theta_phi(double theta, double phi) {
    if (!(theta > 0.0 && theta <= 1.0)) {
        throw DomainError("theta must be in (0,1], got " +
                          std::to_string(theta));
    }
    if (!(phi >= 0.0 && phi < 1.0)) {
        throw DomainError("phi must be in [0,1), got " + std::to_string(phi));
    }
}

const ClassConcept& require_concept(const KnowledgeBase& kb,
                                    const std::string& class_label) {
    const ClassConcept* cc = kb.find_concept(class_label);
    if (cc == nullptr) {
        throw UnknownClassError("no class concept for '" + class_label + "'");
    }
    return *cc;
}

}  // namespace

RepresentativeModel representative_of_class(const KnowledgeBase& kb,
                                            const std::string& class_label,
                                            RepresentativeKind kind,
                                            double theta) {
    require_theta_phi(theta, 0.0);
    if (kind == RepresentativeKind::PhysicalOfFunction) {
        throw DomainError(
            "PhysicalOfFunction is built from a function model, not a class");
    }
    const ClassConcept& cc = require_concept(kb, class_label);
    const bool want_functional = kind == RepresentativeKind::FunctionalOfClass;
    RepresentativeModel model;
    model.owner = class_label;
    model.kind = kind;
    model.theta = theta;
    for (const auto& [quality, membership] : cc.entries) {
        if (kb.is_functional_property(quality.property) != want_functional) {
            continue;
        }
        if (membership >= theta) model.qualities.insert(quality);
    }
    return model;
}

RepresentativeModel representative_of_function(const KnowledgeBase& kb,
                                               const QualityLabel& functional,
                                               double theta) {
    require_theta_phi(theta, 0.0);
    const FunctionModel* fm = kb.find_function_model(functional);
    if (fm == nullptr) {
        throw DomainError("no function model for quality '" +
                          functional.rendered() + "'");
    }
    RepresentativeModel model;
    model.owner = functional.rendered();
    model.kind = RepresentativeKind::PhysicalOfFunction;
    model.theta = theta;
    for (const auto& [quality, proportion] : fm->entries) {
        if (proportion >= theta) model.qualities.insert(quality);
    }
    return model;
}

QualitySet relevant_functional_qualities(const KnowledgeBase& kb,
                                         const std::string& class_label,
                                         double theta, double phi) {
    require_theta_phi(theta, phi);
    const QualitySet class_rp =
        representative_of_class(kb, class_label,
                                RepresentativeKind::PhysicalOfClass, theta)
            .qualities;
    const QualitySet class_rf =
        representative_of_class(kb, class_label,
                                RepresentativeKind::FunctionalOfClass, theta)
            .qualities;
    QualitySet relevant;
    for (const auto& f : class_rf) {
        const QualitySet f_rp =
            representative_of_function(kb, f, theta).qualities;
        if (jaccard(class_rp, f_rp) > phi) relevant.insert(f);
    }
    return relevant;
}

RelevantPhysical relevant_physical_qualities(const KnowledgeBase& kb,
                                             const std::string& class_label,
                                             double theta, double phi) {
    const QualitySet class_rp =
        representative_of_class(kb, class_label,
                                RepresentativeKind::PhysicalOfClass, theta)
            .qualities;
    const QualitySet relevant_f =
        relevant_functional_qualities(kb, class_label, theta, phi);

    RelevantPhysical result;
    if (relevant_f.empty()) {
        // A robot still needs an answer; the flag keeps the degradation
        // observable in the explanation.
        result.qualities = class_rp;
        result.fallback = true;
        return result;
    }
    for (const auto& f : relevant_f) {
        const QualitySet f_rp =
            representative_of_function(kb, f, theta).qualities;
        for (const auto& p : f_rp) {
            if (class_rp.count(p) > 0) result.qualities.insert(p);
        }
    }
    return result;
}

Substitutability substitutability(const KnowledgeBase& kb,
                                  const std::string& missing,
                                  const std::string& candidate, double theta,
                                  double phi) {
    require_theta_phi(theta, phi);
    const QualitySet missing_pp =
        relevant_physical_qualities(kb, missing, theta, phi).qualities;
    const QualitySet candidate_rp =
        representative_of_class(kb, candidate,
                                RepresentativeKind::PhysicalOfClass, theta)
            .qualities;
    Substitutability result;
    result.similarity = jaccard(missing_pp, candidate_rp);
    result.verdict = result.similarity > phi ? Verdict::Substitute
                                             : Verdict::NotSubstitute;
    return result;
}

QueryResult answer_query(KnowledgeBase& kb, const std::string& missing,
                         const std::vector<std::string>& candidates,
                         double theta, double phi) {
    require_theta_phi(theta, phi);
    if (candidates.empty()) {
        throw DomainError("candidate list is empty");
    }
    if (!kb.has_class(missing)) {
        throw UnknownClassError("unknown class '" + missing + "'");
    }
    for (const auto& c : candidates) {
        if (!kb.has_class(c)) {
            throw UnknownClassError("unknown class '" + c + "'");
        }
    }

    QueryResult result;
    result.missing_tool = missing;
    result.theta = theta;
    result.phi = phi;

    const SubstitutionModel* cached =
        kb.find_substitution_model(missing, theta, phi);
    if (cached != nullptr) {
        result.cache_hit = true;
        result.explanation.relevant_functional = cached->relevant_functional;
        result.explanation.relevant_physical = cached->relevant_physical;
        // O_F' empty is exactly the fallback condition.
        result.explanation.fallback = cached->relevant_functional.empty();
    } else {
        const QualitySet relevant_f =
            relevant_functional_qualities(kb, missing, theta, phi);
        const RelevantPhysical relevant_p =
            relevant_physical_qualities(kb, missing, theta, phi);
        result.explanation.relevant_functional = relevant_f;
        result.explanation.relevant_physical = relevant_p.qualities;
        result.explanation.fallback = relevant_p.fallback;
    }

    const QualitySet& missing_pp = result.explanation.relevant_physical;
    for (const auto& candidate : candidates) {
        const QualitySet candidate_rp =
            representative_of_class(kb, candidate,
                                    RepresentativeKind::PhysicalOfClass, theta)
                .qualities;
        RankedCandidate ranked;
        ranked.class_label = candidate;
        ranked.similarity = jaccard(missing_pp, candidate_rp);
        ranked.verdict = ranked.similarity > phi ? Verdict::Substitute
                                                 : Verdict::NotSubstitute;
        result.ranked_candidates.push_back(ranked);

        QualitySet overlap;
        for (const auto& q : missing_pp) {
            if (candidate_rp.count(q) > 0) overlap.insert(q);
        }
        result.explanation.overlaps[candidate] = std::move(overlap);
    }

    std::sort(result.ranked_candidates.begin(), result.ranked_candidates.end(),
              [](const RankedCandidate& a, const RankedCandidate& b) {
                  if (a.similarity != b.similarity) {
                      return a.similarity > b.similarity;
                  }
                  return a.class_label < b.class_label;
              });
    for (const auto& ranked : result.ranked_candidates) {
        if (ranked.verdict == Verdict::Substitute) {
            result.chosen = ranked.class_label;
            break;
        }
    }

    SubstitutionModel model;
    model.missing_tool = missing;
    model.theta = theta;
    model.phi = phi;
    model.relevant_physical = result.explanation.relevant_physical;
    model.relevant_functional = result.explanation.relevant_functional;
    for (const auto& ranked : result.ranked_candidates) {
        if (ranked.verdict == Verdict::Substitute) {
            model.positive_substitutes[ranked.class_label] = ranked.similarity;
        } else {
            model.negative_substitutes[ranked.class_label] = ranked.similarity;
        }
    }
    extend_with_substitution_model(kb, model);

    return result;
}

}  // namespace ersatz
