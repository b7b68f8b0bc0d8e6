//! A fully constructed fold: root system, Chevalley algebra, lifted
//! automorphism, graded pieces and twisted generators, bundled for the
//! commands and suites.

use weyl_core::liealg::{
    build_chevalley, folded_cartan_from_fixed_points, graded_decomposition, lift_automorphism,
    twisted_generators, ChevalleyAlgebra, GradedPieces, LiftedAut, TwistedGenerators,
};
use weyl_core::rootdata::{fold, DiagramAut, FoldedRootData, RootSystem, TypeLabel};
use weyl_core::weylmod::UntwistedContext;

pub struct FoldSession {
    pub rs: RootSystem,
    pub aut: DiagramAut,
    pub fd: FoldedRootData,
    pub alg: ChevalleyAlgebra,
    pub lifted: LiftedAut,
    pub gp: GradedPieces,
    pub tg: TwistedGenerators,
    pub ctx: UntwistedContext,
}

impl FoldSession {
    /// Build everything for a type, rank and 1-based node permutation.
    pub fn new(label: TypeLabel, rank: usize, perm1: &[usize]) -> Result<Self, String> {
        let rs = RootSystem::build(label, rank).map_err(|e| e.to_string())?;
        let perm0: Vec<usize> = perm1
            .iter()
            .map(|&p| p.checked_sub(1).ok_or_else(|| "permutation entries are 1-based".to_string()))
            .collect::<Result<_, _>>()?;
        let aut = DiagramAut::new(&rs, perm0).map_err(|e| e.to_string())?;
        let fd = fold(&rs, &aut).map_err(|e| e.to_string())?;
        let alg = build_chevalley(&rs, aut.m).map_err(|e| e.to_string())?;
        let lifted = lift_automorphism(&alg, &aut).map_err(|e| e.to_string())?;
        let gp = graded_decomposition(&alg, &lifted, &fd);
        let tg = twisted_generators(&alg, &lifted, &fd).map_err(|e| e.to_string())?;
        let ctx = UntwistedContext::new(&alg).map_err(|e| e.to_string())?;
        Ok(FoldSession { rs, aut, fd, alg, lifted, gp, tg, ctx })
    }

    pub fn identity(label: TypeLabel, rank: usize) -> Result<Self, String> {
        let perm1: Vec<usize> = (1..=rank).collect();
        Self::new(label, rank, &perm1)
    }

    /// Folded Cartan matrix recomputed from the fixed-point generators.
    pub fn folded_cartan_oracle(&self) -> Result<Vec<Vec<i64>>, String> {
        folded_cartan_from_fixed_points(&self.alg, &self.fd, &self.tg).map_err(|e| e.to_string())
    }
}
