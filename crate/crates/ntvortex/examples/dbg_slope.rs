use ntvortex::perturb::Corrector;

fn main() {
    let c = Corrector::new(2, 1).unwrap();
    let (s1, s2) = c.sigma;
    println!("sigma = ({s1}, {s2})");
    for &r in &[1e3, 1e4, 5e4, 9e4, 9.99e4, 1.001e5, 1.1e5, 2e5] {
        let (u2, v2) = c.eval(r).unwrap();
        println!("r={:.4e} u2={:.8} v2={:.8} u2+0.5(s1+s2)lnr={:.8} v2+0.5(s1-s2)lnr={:.8}",
            r, u2, v2, u2 + 0.5*(s1+s2)*r.ln(), v2 + 0.5*(s1-s2)*r.ln());
    }
}
