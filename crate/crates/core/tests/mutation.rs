use dlsb::eval::{check_rule_bounded, check_value_cover, EDBInstance};
use dlsb::{parse_adorned_program, Constant};

const CORRUPTED: &str = "
tc[tc(X,Y) :- e(X,Y)](X,Y) :- e(X,Y).
tc[tc(X,Y) :- e(X,_), e(Y,_)](X,Y) :- tc[tc(X,Y) :- e(X,Y)](X,Z), e(Z,Y).
tc[tc(X,Y) :- e(X,_), e(Y,_)](X,Y) :- tc[tc(X,Y) :- e(X,_), e(Y,_)](X,Z), e(Z,Y).
";

const SOUND: &str = "
tc[tc(X,Y) :- e(X,Y)](X,Y) :- e(X,Y).
tc[tc(X,Y) :- e(X,_), e(_,Y)](X,Y) :- tc[tc(X,Y) :- e(X,Y)](X,Z), e(Z,Y).
tc[tc(X,Y) :- e(X,_), e(_,Y)](X,Y) :- tc[tc(X,Y) :- e(X,_), e(_,Y)](X,Z), e(Z,Y).
";

#[test]
fn misplaced_adornment_variable_is_reported() {
    let d = EDBInstance::parse("e(1,2). e(2,3).").unwrap();
    let bad = check_rule_bounded(&parse_adorned_program(CORRUPTED).unwrap(), &d).unwrap();
    assert!(!bad.is_empty());
    // tc(1,3) is derived although no e-fact starts at 3.
    let t13 = vec![Constant::Int(1), Constant::Int(3)];
    assert!(bad.iter().all(|v| v.tuple == t13), "{bad:?}");
    let good = parse_adorned_program(SOUND).unwrap();
    assert!(check_rule_bounded(&good, &d).unwrap().is_empty());
    assert!(check_value_cover(&good, &d).unwrap().is_empty());
}
