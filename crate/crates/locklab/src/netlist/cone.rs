//! Logic cone extraction.

use super::{Netlist, NetlistError};

/// Extracts the transitive fanin cone of one primary output into a
/// standalone netlist. Reached primary inputs and key inputs keep their
/// names and relative order; the result has a single output.
pub fn extract_logic_cone(n: &Netlist, output: &str) -> Result<Netlist, NetlistError> {
    let po = n.find_net(output).ok_or_else(|| NetlistError::UnknownNet(output.to_string()))?;
    if !n.outputs().contains(&po) {
        return Err(NetlistError::UnknownNet(output.to_string()));
    }

    let mut reached = vec![false; n.net_count()];
    let mut stack = vec![po];
    while let Some(id) = stack.pop() {
        if reached[id.index()] {
            continue;
        }
        reached[id.index()] = true;
        if let Some(g) = n.driver_of(id) {
            stack.extend_from_slice(&g.fanins);
        }
    }

    let mut b = Netlist::builder();
    for &pi in n.inputs() {
        if reached[pi.index()] {
            b.add_input(n.name(pi))?;
        }
    }
    for (i, &k) in n.key_inputs().iter().enumerate() {
        if reached[k.index()] {
            b.add_key_input(n.name(k), Some(i as u64))?;
        }
    }
    b.add_output(output)?;
    for g in n.gates() {
        if reached[g.output.index()] {
            let fanins: Vec<_> = g.fanins.iter().map(|&f| b.net(n.name(f))).collect();
            b.add_gate(n.name(g.output), g.kind, &fanins)?;
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_bench;

    #[test]
    fn cone_keeps_only_reached_logic() {
        let n = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(keyinput0)\nOUTPUT(f)\nOUTPUT(g)\n\
             t = AND(a, keyinput0)\nf = OR(t, b)\ng = NOT(c)\n",
        )
        .unwrap();
        let cone = extract_logic_cone(&n, "f").unwrap();
        assert_eq!(cone.outputs().len(), 1);
        assert_eq!(cone.inputs().len(), 2); // a, b but not c
        assert_eq!(cone.key_count(), 1);
        assert_eq!(cone.gate_count(), 2);
        assert!(cone.find_net("c").is_none());
    }

    #[test]
    fn cone_function_matches_original_output() {
        let n = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(f)\nOUTPUT(g)\n\
             ab = AND(a, b)\nf = OR(ab, c)\ng = XOR(a, c)\n",
        )
        .unwrap();
        let cone = extract_logic_cone(&n, "g").unwrap();
        // cone inputs are a and c
        for x in 0u32..8 {
            let bits = [(x & 1) != 0, (x & 2) != 0, (x & 4) != 0];
            let full = n.simulate(&bits, &[]).unwrap()[1];
            let small = cone.simulate(&[bits[0], bits[2]], &[]).unwrap()[0];
            assert_eq!(full, small);
        }
    }

    #[test]
    fn unknown_output_is_rejected() {
        let n = parse_bench("INPUT(a)\nOUTPUT(f)\nf = NOT(a)\n").unwrap();
        assert!(extract_logic_cone(&n, "a").is_err());
        assert!(extract_logic_cone(&n, "zz").is_err());
    }
}
