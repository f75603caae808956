//! Grammars shipped with the crate.

pub const FIG2_VPG: &str = include_str!("../corpus/fig2.vpg");
pub const G2_VPG: &str = include_str!("../corpus/g2.vpg");
pub const APPENDIX_B_VPG: &str = include_str!("../corpus/appendix_b.vpg");
pub const PENDING_CALLS_VPG: &str = include_str!("../corpus/pending_calls.vpg");
pub const PENDING_RETURNS_VPG: &str = include_str!("../corpus/pending_returns.vpg");
pub const TWO_CALLS_VPG: &str = include_str!("../corpus/two_calls.vpg");
pub const MIXED_VPG: &str = include_str!("../corpus/mixed.vpg");
pub const ACCEPTANCE_TRAP_VPG: &str = include_str!("../corpus/acceptance_trap.vpg");
pub const APPENDIX_F_TCFG: &str = include_str!("../corpus/appendix_f.tcfg");
pub const JSON_TCFG: &str = include_str!("../corpus/json.tcfg");
pub const XML_TCFG: &str = include_str!("../corpus/xml.tcfg");
pub const HTML_TCFG: &str = include_str!("../corpus/html.tcfg");
pub const LEFT_REC_TCFG: &str = include_str!("../corpus/left_rec.tcfg");
pub const RIGHT_REC_TCFG: &str = include_str!("../corpus/right_rec.tcfg");

/// Named hand-written VPGs, in a fixed order.
pub fn vpg_grammars() -> Vec<(&'static str, &'static str)> {
    vec![
        ("fig2", FIG2_VPG),
        ("g2", G2_VPG),
        ("appendix_b", APPENDIX_B_VPG),
        ("pending_calls", PENDING_CALLS_VPG),
        ("pending_returns", PENDING_RETURNS_VPG),
        ("two_calls", TWO_CALLS_VPG),
        ("mixed", MIXED_VPG),
        ("acceptance_trap", ACCEPTANCE_TRAP_VPG),
    ]
}

/// Named tagged CFGs, in a fixed order.
pub fn tagged_grammars() -> Vec<(&'static str, &'static str)> {
    vec![
        ("appendix_f", APPENDIX_F_TCFG),
        ("json", JSON_TCFG),
        ("xml", XML_TCFG),
        ("html", HTML_TCFG),
        ("right_rec", RIGHT_REC_TCFG),
    ]
}
