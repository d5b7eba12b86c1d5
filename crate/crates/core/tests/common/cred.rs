use ssiforge_core::credential::CredentialChecks;
use ssiforge_core::sim::SplitMix64;
use ssiforge_core::{
    create_presentation, generate_keypair, issue_credential, verify_credential, verify_presentation, Claims,
    Credential, Did, DidDirectory, KeyPair, TrustRegistry, VerificationOutcome,
};

pub struct World {
    pub directory: DidDirectory,
    pub issuer: (KeyPair, Did),
    pub holder: (KeyPair, Did),
    pub other: (KeyPair, Did),
    pub subject: Did,
    pub trust: TrustRegistry,
}

pub fn world() -> World {
    let mut directory = DidDirectory::new();
    let mut party = |b: u8| {
        let keys = generate_keypair([b; 32]);
        let did = directory.register(keys.public_key());
        (keys, did)
    };
    let issuer = party(1);
    let holder = party(2);
    let other = party(3);
    let subject = party(4).1;
    let mut trust = TrustRegistry::default();
    trust.allow("verifier", "Permit", issuer.1.clone());
    World {
        directory,
        issuer,
        holder,
        other,
        subject,
        trust,
    }
}

impl World {
    pub fn issue(&self, claims: Claims) -> Credential {
        issue_credential(
            &self.issuer.0,
            &self.issuer.1,
            &self.subject,
            &self.holder.1,
            "Permit",
            claims,
            7,
        )
        .expect("issuer and holder differ")
    }

    pub fn present(&self, credential: &Credential, nonce: [u8; 16]) -> VerificationOutcome {
        let p = create_presentation(&self.holder.0, &self.holder.1, credential, nonce);
        verify_presentation(&p, &self.directory, &self.trust, "verifier", &nonce)
    }

    pub fn check(&self, credential: &Credential) -> CredentialChecks {
        verify_credential(credential, &self.directory)
    }
}

fn flip_in_string(s: &mut String, rng: &mut SplitMix64) {
    let mut bytes = std::mem::take(s).into_bytes();
    let i = (rng.next_u64() % bytes.len() as u64) as usize;
    // the low seven bits keep an ASCII byte ASCII, so the string stays UTF-8
    let bit = rng.next_u64() % 7;
    bytes[i] ^= 1 << bit;
    *s = String::from_utf8(bytes).expect("ASCII stays valid");
}

/// Flips one random bit of a claim value, the signature or the id. Claim
/// values must be non-empty.
pub fn mutate(credential: &Credential, rng: &mut SplitMix64) -> (Credential, &'static str) {
    let mut c = credential.clone();
    match rng.next_u64() % 3 {
        0 => {
            let n = c.claims.len() as u64;
            let k = (rng.next_u64() % n) as usize;
            let value = c.claims.values_mut().nth(k).expect("index below len");
            flip_in_string(value, rng);
            (c, "claims")
        }
        1 => {
            let i = (rng.next_u64() % c.signature.len() as u64) as usize;
            c.signature[i] ^= 1 << (rng.next_u64() % 8);
            (c, "signature")
        }
        _ => {
            flip_in_string(&mut c.id, rng);
            (c, "id")
        }
    }
}

/// ASCII claim maps of one to four entries.
pub fn random_claims(rng: &mut SplitMix64) -> Claims {
    let n = 1 + rng.next_u64() % 4;
    (0..n)
        .map(|i| {
            let len = 1 + rng.next_u64() % 12;
            let value: String = (0..len).map(|_| (b' ' + (rng.next_u64() % 95) as u8) as char).collect();
            (format!("k{i}"), value)
        })
        .collect()
}

/// Runs `count` single-bit mutations; returns how many escaped detection.
pub fn soundness(count: usize, seed: u64) -> usize {
    let w = world();
    let mut rng = SplitMix64::new(seed);
    let mut escaped = 0;
    for _ in 0..count {
        let original = w.issue(random_claims(&mut rng));
        let (mutated, _) = mutate(&original, &mut rng);
        assert_ne!(mutated, original);
        let checks = w.check(&mutated);
        if checks.integrity && checks.issuer_signature {
            escaped += 1;
        }
    }
    escaped
}

/// Honest issue-then-present on `count` random claim sets; returns failures.
pub fn completeness(count: usize, seed: u64) -> usize {
    let w = world();
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .filter(|_| {
            let credential = w.issue(random_claims(&mut rng));
            !w.present(&credential, rng.nonce()).verdict
        })
        .count()
}
