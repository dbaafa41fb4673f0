"""
Gendered caption detection and counterfactual pairs
====================================================

Every caption is classified by the gender its words reveal, then rewritten
into a masculine and a feminine variant. Words outside the lexicon are left
untouched, so the rest of the sentence survives byte-for-byte.
"""

from cfaudit import default_lexicon, edit_caption, make_counterfactual_pair
from cfaudit.captions import CaptionGender

lexicon = default_lexicon()

# The lexicon ships as plain JSON; every masculine keyword maps to exactly
# one feminine keyword and back.
print("masculine keywords:", ", ".join(sorted(lexicon.masculine_terms)))
print()

captions = [
    "man buying some fruit on the market , selective focus",
    "actor in garment with artist",
    "painting of a young woman dressed as video game series",
    "actress with a beautiful smile",
    "person , was surprised by the staff",
    "the king and queen wave from the balcony",
]

for caption in captions:
    pair = make_counterfactual_pair(caption, lexicon)
    print(f"original : {pair.original}")
    print(f"detected : {pair.detected_gender.value}")
    print(f"masculine: {pair.masculine}")
    print(f"feminine : {pair.feminine}")
    print()

# Editing is whole-word and case-preserving: 'Man' keeps its capital,
# 'mandolin' is not a match.
tricky = "Man playing a mandolin for the Waiter"
print("tricky   :", tricky)
print("feminine :", edit_caption(tricky, CaptionGender.FEMININE, lexicon))
