use qcrelax_testkit::criteria::{envelope_containment, mf_dominance, mf_vertex_tightness};

#[test]
fn every_envelope_contains_its_graph() {
    envelope_containment(100).unwrap();
}

#[test]
fn meyer_floudas_dominates_nested_mccormick() {
    mf_dominance(100).unwrap();
}

#[test]
fn envelopes_are_tight_at_box_vertices() {
    mf_vertex_tightness(100).unwrap();
}
