"""Writes lexicon/embeddings.txt from hand-set axis weights."""

from pathlib import Path

AX = ["egg","milk","peanut","tree nut","soy","wheat/gluten","fish","shellfish","sesame","maize",
      "mustard","celery","lupin","sulphites","mollusc","legume","seed","plant","meat","neutral"]
W = {
 "egg": {"egg": 3}, "eggs": {"egg": 3}, "yolk": {"egg": 2.5}, "yolks": {"egg": 2.5}, "mayonnaise": {"egg": 2.5},
 "mayo": {"egg": 2.5}, "meringue": {"egg": 2.5, "neutral": .3}, "omelette": {"egg": 2},
 "milk": {"milk": 3}, "butter": {"milk": 1}, "cheese": {"milk": 3}, "parmesan": {"milk": 3}, "parmigiano": {"milk": 3},
 "reggiano": {"milk": 2}, "mozzarella": {"milk": 3}, "cream": {"milk": 2.5}, "yogurt": {"milk": 3}, "ghee": {"milk": 2.5},
 "cheddar": {"milk": 3}, "buttermilk": {"milk": 3}, "ricotta": {"milk": 3}, "feta": {"milk": 3},
 "peanut": {"peanut": 3}, "peanuts": {"peanut": 3}, "groundnuts": {"peanut": 3},
 "cashew": {"tree nut": 3}, "cashews": {"tree nut": 3}, "walnut": {"tree nut": 3}, "walnuts": {"tree nut": 3},
 "almond": {"tree nut": 3}, "almonds": {"tree nut": 3}, "pine": {"tree nut": 1, "plant": .5}, "nuts": {"tree nut": 2},
 "pesto": {"tree nut": 2, "plant": 1, "milk": .5}, "hazelnuts": {"tree nut": 3}, "pecans": {"tree nut": 3},
 "pistachios": {"tree nut": 3},
 "soy": {"soy": 3}, "shoyu": {"soy": 2, "wheat/gluten": 1}, "tamari": {"soy": 3}, "tofu": {"soy": 3}, "miso": {"soy": 3},
 "edamame": {"soy": 2.5, "legume": .5}, "tempeh": {"soy": 3}, "soybeans": {"soy": 3},
 "flour": {"wheat/gluten": 3}, "bread": {"wheat/gluten": 3}, "noodles": {"wheat/gluten": 2.5}, "spaghetti": {"wheat/gluten": 3},
 "pasta": {"wheat/gluten": 3}, "couscous": {"wheat/gluten": 3}, "breadcrumbs": {"wheat/gluten": 3}, "barley": {"wheat/gluten": 3},
 "wheat": {"wheat/gluten": 3}, "semolina": {"wheat/gluten": 3}, "linguine": {"wheat/gluten": 3}, "toast": {"wheat/gluten": 2.5},
 "salmon": {"fish": 3}, "tuna": {"fish": 3}, "cod": {"fish": 3}, "anchovies": {"fish": 3}, "fish": {"fish": 3},
 "mackerel": {"fish": 3}, "fillets": {"neutral": .3},
 "shrimp": {"shellfish": 3}, "prawns": {"shellfish": 3}, "crab": {"shellfish": 3}, "lobster": {"shellfish": 3},
 "crayfish": {"shellfish": 3}, "langoustines": {"shellfish": 3},
 "sesame": {"sesame": 3}, "tahini": {"sesame": 3}, "seeds": {"seed": 1},
 "corn": {"maize": 3}, "cornstarch": {"maize": 3}, "cornflour": {"maize": 2, "wheat/gluten": .5}, "cornmeal": {"maize": 3},
 "masa": {"maize": 3}, "harina": {"maize": 1}, "tortillas": {"maize": 2}, "tortilla": {"maize": 2}, "polenta": {"maize": 3},
 "popcorn": {"maize": 3}, "syrup": {"neutral": .5}, "maize": {"maize": 3}, "grits": {"maize": 3},
 "mustard": {"mustard": 3}, "dijon": {"mustard": 3},
 "celery": {"celery": 3}, "celeriac": {"celery": 3},
 "lupin": {"lupin": 6}, "lupini": {"lupin": 3},
 "wine": {"sulphites": 3}, "apricots": {"plant": 1}, "dried": {"sulphites": 3}, "vinegar": {"sulphites": 2.5},
 "mussels": {"mollusc": 3}, "clams": {"mollusc": 3}, "squid": {"mollusc": 3}, "oysters": {"mollusc": 3},
 "scallops": {"mollusc": 3}, "octopus": {"mollusc": 3},
 "chickpeas": {"legume": 3}, "garbanzo": {"legume": 3}, "lentils": {"legume": 3}, "peas": {"legume": 3},
 "beans": {"legume": 1.5, "lupin": .5}, "kidney": {"legume": 1},
 "sunflower": {"seed": 3}, "pumpkin": {"seed": 2, "plant": 1}, "poppy": {"seed": 3}, "chia": {"seed": 3},
 "tomato": {"plant": 3}, "tomatoes": {"plant": 3}, "lettuce": {"plant": 3}, "onion": {"plant": 3}, "onions": {"plant": 3},
 "lime": {"plant": 3}, "lemon": {"plant": 3}, "garlic": {"plant": 3}, "basil": {"plant": 3}, "avocado": {"plant": 3},
 "avocados": {"plant": 3}, "cabbage": {"plant": 3}, "scallion": {"plant": 3}, "scallions": {"plant": 3}, "cilantro": {"plant": 3},
 "coriander": {"plant": 3}, "parsley": {"plant": 3}, "rice": {"plant": 2}, "potatoes": {"plant": 3}, "olive": {"plant": 1},
 "honey": {"neutral": 2}, "sugar": {"neutral": 2}, "salt": {"neutral": 2}, "pepper": {"plant": 1, "neutral": 1},
 "water": {"neutral": 3}, "stock": {"meat": 1, "neutral": 1}, "broth": {"meat": 1, "neutral": 1},
 "chicken": {"meat": 3}, "bacon": {"meat": 3}, "pancetta": {"meat": 3}, "beef": {"meat": 3}, "pork": {"meat": 3},
 "turkey": {"meat": 3}, "ham": {"meat": 3},
 "oil": {"neutral": .5}, "sauce": {"neutral": .5}, "powder": {"neutral": .5}, "baking": {"neutral": .5},
 "white": {"neutral": .3}, "whites": {"neutral": .3}, "green": {"plant": .3}, "red": {"neutral": .3},
 "sour": {"neutral": .3}, "soured": {"neutral": .3}, "black": {"neutral": .3},
}
lines = ["# Hand-built ingredient embeddings: one token per line followed by its",
         f"# {len(AX)} components. Axes: " + ", ".join(AX) + ".",
         "# Allergen-bearing head nouns carry more weight than qualifiers so that",
         "# phrase means lean towards the allergen-bearing word."]
for tok in sorted(W):
    v = [0.0] * len(AX)
    for k, x in W[tok].items():
        v[AX.index(k)] = float(x)
    lines.append(tok + " " + " ".join(f"{x:g}" for x in v))
open(Path(__file__).resolve().parent.parent / "lexicon/embeddings.txt", "w").write("\n".join(lines) + "\n")
